"""
Evaluation statistics and the scenario x model benchmark.

Positioning accuracy is the share of frames whose human-robot separation
error stays within a tolerance (the 0.5 m safety threshold by default).
"""
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

import proximity_ml
from agent_helper.enums import ModelKind
from data.models.frames import PROXIMITY_THRESHOLD
from data.models.ml import EvalMetrics, TrainConfig
from data.models.radio import NoiseConfig
from errors import DataError
from rng import derive_seed
from scenario import builtin_scenarios, run_scenario

logger = logging.getLogger("ips.evalkit")

DEFAULT_TOLERANCE = PROXIMITY_THRESHOLD
BENCH_MODELS = (ModelKind.LR, ModelKind.SGD_HINGE, ModelKind.LINEAR_SVC)
MODEL_LABELS = {ModelKind.LR: "LR", ModelKind.SGD_HINGE: "SGD", ModelKind.LINEAR_SVC: "Linear-SVC"}


@dataclass(frozen=True)
class PositioningReport:
    scenario: str
    n_frames: int
    avg_deviation: float
    accuracy_pct: float
    tolerance: float
    deviations: tuple[float, ...] = field(repr=False)

    def to_dict(self, *, with_series: bool = True) -> dict:
        out = {
            'scenario': self.scenario,
            'n_frames': self.n_frames,
            'avg_deviation': self.avg_deviation,
            'accuracy_pct': self.accuracy_pct,
            'tolerance': self.tolerance,
        }
        if with_series:
            out['deviations'] = list(self.deviations)
        return out


def positioning_report(
    sep_est: Sequence[float],
    sep_true: Sequence[float],
    tolerance: float = DEFAULT_TOLERANCE,
    scenario: str = "",
) -> PositioningReport:
    est = np.asarray(sep_est, dtype=float)
    true = np.asarray(sep_true, dtype=float)
    if est.shape != true.shape:
        raise DataError(f"estimated ({est.size}) and true ({true.size}) series differ in length")
    if est.size == 0:
        raise DataError("no frames to report on")
    if not tolerance >= 0:
        raise DataError(f"tolerance must be >= 0, got {tolerance}")
    deviations = np.abs(est - true)
    return PositioningReport(
        scenario=scenario,
        n_frames=int(est.size),
        avg_deviation=float(np.mean(deviations)),
        accuracy_pct=100.0 * float(np.count_nonzero(deviations <= tolerance)) / est.size,
        tolerance=tolerance,
        deviations=tuple(float(d) for d in deviations),
    )


class DeviationAccumulator:
    """Single-pass version of positioning_report for streamed frames."""

    def __init__(self, tolerance: float = DEFAULT_TOLERANCE, scenario: str = ""):
        self.tolerance = tolerance
        self.scenario = scenario
        self.n = 0
        self.within = 0
        self.mean = 0.0
        self.deviations: list[float] = []

    def add(self, sep_est: float, sep_true: float) -> None:
        deviation = abs(sep_est - sep_true)
        self.n += 1
        self.mean += (deviation - self.mean) / self.n
        if deviation <= self.tolerance:
            self.within += 1
        self.deviations.append(deviation)

    def report(self) -> PositioningReport:
        if self.n == 0:
            raise DataError("no frames to report on")
        return PositioningReport(
            scenario=self.scenario,
            n_frames=self.n,
            avg_deviation=self.mean,
            accuracy_pct=100.0 * self.within / self.n,
            tolerance=self.tolerance,
            deviations=tuple(self.deviations),
        )


# ==========================================================
# BENCH
# ==========================================================

@dataclass(frozen=True)
class BenchCell:
    scenario: str
    model: ModelKind
    metrics: EvalMetrics


@dataclass(frozen=True)
class BenchScenario:
    scenario: str
    positioning: PositioningReport
    cells: tuple[BenchCell, ...]


def _bench_scenario(spec_name: str, seed: int, sigma_db: float, train_fraction: float) -> BenchScenario:
    noise = NoiseConfig(sigma_db=sigma_db, seed=derive_seed(seed, spec_name, "noise"))
    spec = next(s for s in builtin_scenarios(noise) if s.name == spec_name)
    run = run_scenario(spec)
    positioning = positioning_report(
        [e.sep_est for e in run.estimates], [g.true_separation for g in run.truth], scenario=spec_name,
    )
    rows = proximity_ml.rows_from_dataset(run.rows)
    train_rows, test_rows = proximity_ml.split(rows, train_fraction, derive_seed(seed, spec_name, "split"))

    cells = []
    for kind in BENCH_MODELS:
        cfg = TrainConfig.defaults_for(kind, seed=derive_seed(seed, spec_name, kind.value),
                                       train_fraction=train_fraction)
        model = proximity_ml.train(train_rows, kind, cfg)
        metrics = proximity_ml.evaluate(model, test_rows)
        if model.degenerate:
            metrics = dataclasses.replace(metrics, degenerate=True, note="single-class training data")
        cells.append(BenchCell(spec_name, kind, metrics))
    return BenchScenario(spec_name, positioning, tuple(cells))


def run_bench(
    seed: int,
    *,
    sigma_db: float = 2.0,
    train_fraction: float = 0.8,
    threads: int = 1,
) -> list[BenchScenario]:
    """Every builtin scenario x every model; output order is fixed."""
    names = [spec.name for spec in builtin_scenarios()]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_bench_scenario, name, seed, sigma_db, train_fraction) for name in names]
            return [f.result() for f in futures]
    return [_bench_scenario(name, seed, sigma_db, train_fraction) for name in names]


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.2f}"


def format_bench_table(results: Sequence[BenchScenario], seed: Optional[int] = None) -> str:
    """Text table laid out as MODEL | ACCURACY % | F1-SCORE per scenario."""
    width = (12, 12, 10)
    rule = "+" + "+".join("-" * (w + 2) for w in width) + "+"
    lines = []
    if seed is not None:
        lines.append(f"seed {seed}")
    lines += [rule, f"| {'MODEL':<{width[0]}} | {'ACCURACY %':>{width[1]}} | {'F1-SCORE':>{width[2]}} |", rule]
    for result in results:
        pos = result.positioning
        lines.append(
            f"| {result.scenario + ':':<{sum(width) + 6}} |"
        )
        for cell in result.cells:
            flag = " *" if cell.metrics.degenerate else ""
            lines.append(
                f"| {MODEL_LABELS[cell.model]:<{width[0]}} "
                f"| {_fmt(100.0 * cell.metrics.accuracy):>{width[1]}} "
                f"| {_fmt(cell.metrics.f1) + flag:>{width[2]}} |"
            )
        lines.append(
            f"| {'positioning':<{width[0]}} | {_fmt(pos.accuracy_pct):>{width[1]}} "
            f"| {'dev ' + _fmt(pos.avg_deviation) + 'm':>{width[2]}} |"
        )
        lines.append(rule)
    lines.append("* degenerate: a class is absent from the training or test split")
    return "\n".join(lines)
