import io
import json

import pytest

from data import dataset_io
from ips_sim import cli_main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for name in ("IPS_SIM_SEED", "IPS_LOG_LEVEL", "IPS_BENCH_THREADS"):
        monkeypatch.delenv(name, raising=False)


def run_cli(capsys, *argv):
    code = cli_main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_noiseless_simulate_then_report(capsys, tmp_path, monkeypatch):
    code, csv_text, _ = run_cli(capsys, "simulate", "--scenario", "stationary", "--sigma", "0", "--seed", "1")
    assert code == 0
    assert csv_text.splitlines()[0].startswith("timestamp,hd1,hd2,hd3")

    monkeypatch.setattr("sys.stdin", io.StringIO(csv_text))
    code, out, _ = run_cli(capsys, "report")
    report = json.loads(out)
    assert code == 0
    assert report["n_frames"] == 901
    assert report["accuracy_pct"] == 100.0
    assert report["avg_deviation"] == pytest.approx(0.0, abs=1e-5)


def test_net_simulation_matches_direct_and_writes_signals(capsys, tmp_path):
    direct, net = tmp_path / "direct.csv", tmp_path / "net.csv"
    args = ("--scenario", "scenario3", "--sigma", "0", "--seed", "2")
    assert run_cli(capsys, "simulate", *args, "--out", str(direct))[0] == 0
    assert run_cli(capsys, "simulate", *args, "--net", "--out", str(net))[0] == 0

    a, b = dataset_io.read_dataset(direct), dataset_io.read_dataset(net)
    assert a["sep_est"].tolist() == b["sep_est"].tolist()

    signals = [json.loads(line) for line in (tmp_path / "net.signals.jsonl").read_text().splitlines()]
    assert len(signals) == 51
    assert signals[-1]["flag"] == "CLOSE"
    assert signals[0] == {"t_ms": 0, "flag": "SAFE", "sep": signals[0]["sep"]}


def test_direct_simulation_writes_signals(capsys, tmp_path):
    code, csv_text, _ = run_cli(capsys, "simulate", "--scenario", "scenario3", "--sigma", "0", "--seed", "2")
    assert code == 0
    signals = [json.loads(line) for line in (tmp_path / "scenario3.signals.jsonl").read_text().splitlines()]
    assert len(signals) == len(csv_text.splitlines()) - 1 == 51
    assert [s["t_ms"] for s in signals[:3]] == [0, 100, 200]
    assert signals[-1]["flag"] == "CLOSE"

    run_cli(capsys, "simulate", "--scenario", "scenario3", "--sigma", "0", "--seed", "2", "--net",
            "--signals", str(tmp_path / "net.jsonl"))
    assert (tmp_path / "net.jsonl").read_text() == (tmp_path / "scenario3.signals.jsonl").read_text()


def test_simulate_is_byte_deterministic(capsys):
    first = run_cli(capsys, "simulate", "--scenario", "scenario2", "--seed", "9")[1]
    second = run_cli(capsys, "simulate", "--scenario", "scenario2", "--seed", "9")[1]
    assert first == second
    assert run_cli(capsys, "simulate", "--scenario", "scenario2", "--seed", "10")[1] != first


def test_seed_falls_back_to_environment(capsys, monkeypatch):
    explicit = run_cli(capsys, "simulate", "--scenario", "scenario1", "--seed", "4")[1]
    monkeypatch.setenv("IPS_SIM_SEED", "4")
    assert run_cli(capsys, "simulate", "--scenario", "scenario1")[1] == explicit


def test_train_and_evaluate(capsys, tmp_path):
    data = tmp_path / "s3.csv"
    run_cli(capsys, "simulate", "--scenario", "scenario3", "--sigma", "0", "--seed", "3", "--out", str(data))
    model_path = tmp_path / "svc.json"

    code, out, _ = run_cli(capsys, "train", "--data", str(data), "--model", "svc", "--out", str(model_path))
    assert code == 0
    result = json.loads(out)
    assert result["model"] == "LINEAR_SVC"
    assert result["n_train"] + result["n_test"] == 51
    assert set(result["test"]) >= {"accuracy", "precision", "recall", "f1", "confusion"}
    assert json.loads(model_path.read_text())["kind"] == "LINEAR_SVC"

    code, out, _ = run_cli(capsys, "evaluate", "--data", str(data), "--model-file", str(model_path))
    assert code == 0
    metrics = json.loads(out)
    assert sum(metrics["confusion"].values()) == 51


def test_calibrate_from_sample_files(capsys, tmp_path):
    reference, known = tmp_path / "ref.csv", tmp_path / "known.csv"
    reference.write_text("timestamp,ap_id,rssi\n0.0,1,-39\n0.1,1,-41\n0.2,2,-45\n")
    known.write_text("timestamp,ap_id,rssi\n1.0,1,-60\n1.1,1,-60\n1.2,2,-65\n")
    code, out, _ = run_cli(capsys, "calibrate", "--reference-samples", str(reference),
                           "--samples", str(known), "--known-distance", "10")
    assert code == 0
    params = json.loads(out)
    assert [p["ap_id"] for p in params] == [1, 2]
    assert params[0]["a_ref"] == pytest.approx(-40.0)
    assert params[0]["n_env"] == pytest.approx(2.0)
    assert params[1]["n_env"] == pytest.approx(2.0)


def test_calibrate_simulated_session(capsys):
    code, out, _ = run_cli(capsys, "calibrate", "--simulate", "--known-distance", "3", "--seed", "2")
    assert code == 0
    params = json.loads(out)
    assert [p["ap_id"] for p in params] == [1, 2, 3]
    assert params[0]["a_ref"] == pytest.approx(-41.0, abs=0.5)
    assert params[0]["n_env"] == pytest.approx(3.2, abs=0.3)


def test_bench_output_is_deterministic(capsys):
    first = run_cli(capsys, "bench", "--all", "--seed", "7")
    second = run_cli(capsys, "bench", "--all", "--seed", "7", "--threads", "3")
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    assert "Linear-SVC" in first[1]


def test_usage_errors_exit_1(capsys):
    code, out, err = run_cli(capsys, "train", "--data", "x.csv")
    assert code == 1 and out == "" and "usage error" in err
    assert run_cli(capsys, "frobnicate")[0] == 1
    assert run_cli(capsys, "calibrate", "--known-distance", "3")[0] == 1
    assert run_cli(capsys, "bench", "--seed", "-1")[0] == 1
    assert run_cli(capsys, "bench", "--all", "--scenario", "scenario3")[0] == 1


def test_data_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,hd1\n0,1\n")
    code, out, err = run_cli(capsys, "report", "--data", str(bad))
    assert code == 2 and out == ""
    assert "missing columns" in err

    assert run_cli(capsys, "report", "--data", str(tmp_path / "absent.csv"))[0] == 2
    assert run_cli(capsys, "simulate", "--scenario", "nowhere")[0] == 2

    known = tmp_path / "known.csv"
    known.write_text("timestamp,ap_id,rssi\n0.0,1,-60\n")
    assert run_cli(capsys, "calibrate", "--samples", str(known), "--a-ref", "-40", "--known-distance", "1")[0] == 2


def test_calibrated_params_feed_simulation(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "calibrate", "--simulate", "--known-distance", "3", "--seed", "5")
    params = tmp_path / "params.json"
    params.write_text(out)

    code, csv_text, _ = run_cli(capsys, "simulate", "--scenario", "scenario1", "--sigma", "0",
                                "--params", str(params))
    assert code == 0
    assert len(csv_text.splitlines()) == 1 + 51

    params.write_text('[{"ap_id": 1}]')
    assert run_cli(capsys, "simulate", "--scenario", "scenario1", "--params", str(params))[0] == 2


def test_non_numeric_cells_exit_2(capsys, tmp_path):
    data = tmp_path / "s3.csv"
    run_cli(capsys, "simulate", "--scenario", "scenario3", "--sigma", "0", "--seed", "3", "--out", str(data))
    lines = data.read_text().splitlines()
    cells = lines[2].split(",")
    cells[1] = "abc"
    lines[2] = ",".join(cells)
    data.write_text("\n".join(lines) + "\n")

    code, out, err = run_cli(capsys, "train", "--data", str(data), "--model", "lr", "--out", str(tmp_path / "m.json"))
    assert code == 2 and out == ""
    assert "row 1" in err

    known = tmp_path / "known.csv"
    known.write_text("timestamp,ap_id,rssi\n0.0,1,-60\n0.1,1,abc\n")
    code, _, err = run_cli(capsys, "calibrate", "--samples", str(known), "--a-ref", "-40", "--known-distance", "3")
    assert code == 2
    assert "row 1" in err
