"""
Command-line entry point: calibrate, simulate, train, evaluate, report, bench.

Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 usage error, 2 invalid input or data.
"""
import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv

import evalkit
import netsim
import pathloss
import proximity_ml
from agent_helper.enums import ModelKind
from data import dataset_io
from data.models.ml import TrainConfig
from data.models.radio import NoiseConfig, PathLossParams
from data.models.wire import ChannelConfig
from data.signal_listener import SignalListener
from errors import IpsError, UsageError
from rng import derive_seed, make_generator
from scenario import ScenarioSpec, get_builtin, run_scenario

logger = logging.getLogger("ips.cli")

DEFAULT_LOG_LEVEL = "WARNING"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


# ---------- environment helpers ----------

def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}")


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else _env_int("IPS_SIM_SEED", 0)
    if seed < 0:
        raise UsageError(f"seed must be >= 0, got {seed}")
    return seed


def _emit(document) -> None:
    sys.stdout.write(dataset_io.dump_json(document) + "\n")


# ---------- calibrate ----------

def cmd_calibrate(args) -> int:
    seed = _seed(args)
    if args.simulate:
        noise = NoiseConfig(sigma_db=args.sigma, seed=derive_seed(seed, "calibration"))
        rng = make_generator(noise.seed)
        params = []
        for truth in pathloss.DEFAULT_PARAMS:
            reference, known = pathloss.simulate_calibration(
                truth, args.known_distance, noise, n_samples=args.n_samples, rng=rng,
            )
            params.append(pathloss.calibrate_params(
                reference, known, args.known_distance, ap_id=truth.ap_id, estimator=args.estimator,
            ))
        _emit([p.to_dict() for p in params])
        return 0

    if args.samples is None:
        raise UsageError("calibrate needs --samples (or --simulate)")
    if args.reference_samples is None and args.a_ref is None:
        raise UsageError("calibrate needs --reference-samples or --a-ref")

    known = dataset_io.read_rssi_samples(args.samples)
    reference = dataset_io.read_rssi_samples(args.reference_samples) if args.reference_samples else []
    params = []
    for ap_id in sorted({s.ap_id for s in known}):
        if args.a_ref is not None:
            a_ref = args.a_ref
        else:
            a_ref = pathloss.calibrate_a(pathloss.samples_for_ap(reference, ap_id), args.estimator)
        n_env = pathloss.calibrate_n(pathloss.samples_for_ap(known, ap_id), a_ref,
                                     args.known_distance, args.estimator)
        params.append(PathLossParams(a_ref=a_ref, n_env=n_env, ap_id=ap_id))
    _emit([p.to_dict() for p in params])
    return 0


# ---------- simulate ----------

def _load_scenario(value: str) -> ScenarioSpec:
    if value.endswith(".json") or Path(value).is_file():
        document = dataset_io.load_json(value)
        try:
            return ScenarioSpec.from_dict(document)
        except (KeyError, TypeError, ValueError) as e:
            raise IpsError(f"malformed scenario file {value}: {e}") from e
    return get_builtin(value)


def _signals_path(args, spec: ScenarioSpec) -> str:
    if args.signals:
        return args.signals
    if args.out:
        return str(Path(args.out).with_suffix(".signals.jsonl"))
    return f"{spec.name}.signals.jsonl"


def cmd_simulate(args) -> int:
    seed = _seed(args)
    spec = _load_scenario(args.scenario)
    if args.params:
        spec = dataclasses.replace(spec, params=tuple(dataset_io.load_params(args.params)))
    spec = spec.with_noise(sigma_db=args.sigma, seed=derive_seed(seed, spec.name, "noise"))
    classifier = dataset_io.load_model(args.model_file) if args.model_file else None
    target = args.out or dataset_io.STDIO
    signals_path = _signals_path(args, spec)

    with open(signals_path, "w", encoding="utf-8", newline="\n") as handle:
        sink = dataset_io.JsonLinesWriter(handle)
        listener = SignalListener()
        listener.on_signal(sink)
        if args.net:
            channel = ChannelConfig(
                drop_probability=spec.channel.drop_probability if args.drop is None else args.drop,
                latency_ticks=spec.channel.latency_ticks if args.latency is None else args.latency,
                seed=derive_seed(seed, spec.name, "channel"),
                corrupt_probability=spec.channel.corrupt_probability if args.corrupt is None else args.corrupt,
            )
            run = netsim.run_network(spec, channel=channel, staleness_horizon=args.staleness,
                                     classifier=classifier, listener=listener)
            estimates = [e for e in run.estimates if e is not None]
        else:
            run = run_scenario(spec)
            netsim.direct_signals(run, classifier=classifier, listener=listener)
            estimates = run.estimates

    dataset_io.write_dataset(run.rows, target)
    if args.positions:
        dataset_io.write_positions(estimates, args.positions)
    logger.info("%s: %d signals over %d ticks written to %s", spec.name, sink.count,
                len(run.truth), signals_path)
    return 0


# ---------- train / evaluate ----------

def cmd_train(args) -> int:
    seed = _seed(args)
    kind = ModelKind.from_string(args.model)
    rows = dataset_io.feature_rows(dataset_io.read_dataset(args.data))
    train_rows, test_rows = proximity_ml.split(rows, args.train_fraction, derive_seed(seed, "split"))
    cfg = TrainConfig.defaults_for(kind, seed=derive_seed(seed, kind.value), train_fraction=args.train_fraction)

    model = proximity_ml.train(train_rows, kind, cfg)
    dataset_io.save_json(model.to_dict(), args.out)
    _emit({
        'model': kind.value,
        'n_train': len(train_rows),
        'n_test': len(test_rows),
        'train': proximity_ml.evaluate(model, train_rows).to_dict(),
        'test': proximity_ml.evaluate(model, test_rows).to_dict(),
    })
    return 0


def cmd_evaluate(args) -> int:
    model = dataset_io.load_model(args.model_file)
    rows = dataset_io.feature_rows(dataset_io.read_dataset(args.data))
    _emit(proximity_ml.evaluate(model, rows).to_dict())
    return 0


# ---------- report / bench ----------

def cmd_report(args) -> int:
    frame = dataset_io.read_dataset(args.data)
    name = "" if args.data == dataset_io.STDIO else Path(args.data).stem
    report = evalkit.positioning_report(
        frame["sep_est"].to_numpy(), frame["sep_true"].to_numpy(), args.tolerance, scenario=name,
    )
    _emit(report.to_dict(with_series=args.series))
    return 0


def cmd_bench(args) -> int:
    seed = _seed(args)
    threads = args.threads if args.threads is not None else _env_int("IPS_BENCH_THREADS", 1)
    if threads < 1:
        raise UsageError(f"threads must be >= 1, got {threads}")
    if args.all and args.scenario:
        raise UsageError("--all and --scenario cannot be combined")
    results = evalkit.run_bench(seed, sigma_db=args.sigma, train_fraction=args.train_fraction, threads=threads)
    if args.scenario:
        results = [r for r in results if r.scenario == args.scenario]
        if not results:
            raise UsageError(f"unknown scenario: {args.scenario}")
    sys.stdout.write(evalkit.format_bench_table(results, seed=seed) + "\n")
    return 0


# ---------- parser ----------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ips_sim", description="RSSI indoor positioning and proximity simulator")
    parser.add_argument("--log-level", default=None, help="logging level (env IPS_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="fit path-loss parameters per access point")
    p.add_argument("--samples", help="CSV of RSSI samples at the known distance")
    p.add_argument("--known-distance", type=float, required=True)
    p.add_argument("--reference-samples", help="CSV of RSSI samples at 1 m")
    p.add_argument("--a-ref", type=float, help="use this A instead of reference samples")
    p.add_argument("--estimator", choices=("mean", "median"), default="mean")
    p.add_argument("--simulate", action="store_true", help="calibrate against a simulated session")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--n-samples", type=int, default=pathloss.CALIBRATION_SAMPLES)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("simulate", help="run a scenario and write its dataset CSV")
    p.add_argument("--scenario", required=True, help="builtin name or scenario JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--params", help="path-loss params JSON, e.g. the output of calibrate")
    p.add_argument("--out", help="dataset CSV (default stdout)")
    p.add_argument("--positions", help="also write per-agent fixes to this CSV")
    p.add_argument("--net", action="store_true", help="route reports through the network simulation")
    p.add_argument("--drop", type=float)
    p.add_argument("--latency", type=int)
    p.add_argument("--corrupt", type=float)
    p.add_argument("--staleness", type=int)
    p.add_argument("--signals", help="NavSignal JSON-lines output (default <out>.signals.jsonl, or <scenario>.signals.jsonl when writing to stdout)")
    p.add_argument("--model-file", help="classifier whose verdict is added to each NavSignal")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("train", help="train a proximity classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=("lr", "sgd", "svc", "sgd_hinge", "linear_svc"))
    p.add_argument("--out", required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model-file", required=True)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("report", help="positioning accuracy and average deviation")
    p.add_argument("--data", default=dataset_io.STDIO)
    p.add_argument("--tolerance", type=float, default=evalkit.DEFAULT_TOLERANCE)
    p.add_argument("--series", action="store_true", help="include per-frame deviations")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("bench", help="every builtin scenario x every model")
    p.add_argument("--all", action="store_true", help="all builtin scenarios (the default)")
    p.add_argument("--scenario", help="restrict the table to one scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--threads", type=int)
    p.set_defaults(handler=cmd_bench)
    return parser


def _configure_logging(level: Optional[str]) -> None:
    name = (level or os.getenv("IPS_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(name), int):
        raise UsageError(f"unknown log level: {name}")
    logging.basicConfig(level=name, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv(".env.local")
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.log_level)
        return args.handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except IpsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
