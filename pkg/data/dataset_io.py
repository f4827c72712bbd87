"""CSV / JSON persistence for every file format the tools exchange."""
import json
import logging
import sys
from pathlib import Path
from typing import IO, Iterable, Sequence, TextIO

import pandas as pd

from data.models.frames import DATASET_COLUMNS, DatasetRow, EstimatedFrame
from data.models.ml import FEATURE_NAMES, FeatureRow, LinearModel
from data.models.radio import PathLossParams, RssiSample
from data.models.wire import NavSignal
from errors import DataError, ValidationError

logger = logging.getLogger("ips.dataset-io")

STDIO = "-"
RSSI_COLUMNS = ("timestamp", "ap_id", "rssi")
POSITION_COLUMNS = ("timestamp", "agent_id", "x", "y", "out_of_bounds")

PathLike = str | Path


def _read_csv(source: PathLike | IO, columns: Sequence[str]) -> pd.DataFrame:
    handle = sys.stdin if source == STDIO else source
    try:
        frame = pd.read_csv(handle, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"cannot read CSV {source}: {e}") from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataError(f"CSV {source} is missing columns: {', '.join(missing)}")
    for c in columns:
        frame[c] = pd.to_numeric(frame[c], errors="coerce")
    bad = frame[list(columns)].isna().any(axis=1)
    if bad.any():
        raise DataError("empty or non-numeric value", row=int(bad.idxmax()))
    return frame


def _write_csv(frame: pd.DataFrame, target: PathLike | TextIO) -> None:
    if target == STDIO:
        target = sys.stdout
    frame.to_csv(target, index=False, lineterminator="\n")


# ---------- scenario dataset ----------

def dataset_frame(rows: Iterable[DatasetRow]) -> pd.DataFrame:
    frame = pd.DataFrame([row.to_dict() for row in rows], columns=list(DATASET_COLUMNS))
    return frame.astype({"label": int})


def write_dataset(rows: Iterable[DatasetRow], target: PathLike | TextIO) -> None:
    _write_csv(dataset_frame(rows), target)


def read_dataset(source: PathLike | IO) -> pd.DataFrame:
    frame = _read_csv(source, DATASET_COLUMNS)
    if not frame["label"].isin([0, 1]).all():
        raise DataError("label must be 0 or 1", row=int((~frame["label"].isin([0, 1])).idxmax()))
    return frame


def feature_rows(frame: pd.DataFrame) -> list[FeatureRow]:
    features = frame[list(FEATURE_NAMES)].to_numpy(dtype=float)
    labels = frame["label"].to_numpy(dtype=int)
    return [FeatureRow(tuple(f), int(label)) for f, label in zip(features, labels)]


def write_positions(estimates: Iterable[EstimatedFrame], target: PathLike | TextIO) -> None:
    records = []
    for e in estimates:
        for agent, p in (("human", e.human_est), ("robot", e.robot_est)):
            records.append({"timestamp": e.timestamp, "agent_id": agent,
                            "x": p.x, "y": p.y, "out_of_bounds": p.out_of_bounds})
    _write_csv(pd.DataFrame(records, columns=list(POSITION_COLUMNS)), target)


# ---------- calibration ----------

def read_rssi_samples(source: PathLike | IO) -> list[RssiSample]:
    frame = _read_csv(source, RSSI_COLUMNS)
    samples = []
    for i, record in enumerate(frame[list(RSSI_COLUMNS)].itertuples(index=False)):
        try:
            samples.append(RssiSample(float(record.timestamp), int(record.ap_id), float(record.rssi)))
        except ValidationError as e:
            raise DataError(str(e), row=i) from e
    return samples


def write_rssi_samples(samples: Iterable[RssiSample], target: PathLike | TextIO) -> None:
    frame = pd.DataFrame([(s.timestamp, s.ap_id, s.rssi) for s in samples], columns=list(RSSI_COLUMNS))
    _write_csv(frame, target)


# ---------- JSON documents ----------

def load_json(source: PathLike) -> dict | list:
    try:
        return json.loads(Path(source).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"cannot read JSON {source}: {e}") from e


def dump_json(document: dict | list) -> str:
    return json.dumps(document, sort_keys=True)


def save_json(document: dict | list, target: PathLike) -> None:
    Path(target).write_text(dump_json(document) + "\n", encoding="utf-8")


def load_params(source: PathLike) -> list[PathLossParams]:
    document = load_json(source)
    items = document if isinstance(document, list) else [document]
    try:
        return [PathLossParams.from_dict(item) for item in items]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed params file {source}: {e}") from e


def load_model(source: PathLike) -> LinearModel:
    document = load_json(source)
    try:
        return LinearModel.from_dict(document)
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed model file {source}: {e}") from e


class JsonLinesWriter:
    """NavSignal sink writing one JSON object per line."""

    def __init__(self, stream: TextIO):
        self.stream = stream
        self.count = 0

    def __call__(self, signal: NavSignal) -> None:
        self.stream.write(dump_json(signal.to_dict()) + "\n")
        self.count += 1
