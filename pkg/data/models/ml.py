from dataclasses import dataclass, field
from typing import Optional

from agent_helper.enums import ModelKind
from errors import ValidationError

FEATURE_NAMES = (
    "hd1", "hd2", "hd3", "rd1", "rd2", "rd3",
    "hx_est", "hy_est", "rx_est", "ry_est", "sep_est",
)


@dataclass(frozen=True)
class FeatureRow:
    """Estimation-side features of one frame; ground truth only sets the label."""
    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    l2_lambda: float = 1e-4
    c_param: float = 1.0
    seed: int = 0
    train_fraction: float = 0.8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.l2_lambda < 0 or self.c_param <= 0:
            raise ValidationError("l2_lambda must be >= 0 and c_param > 0")

    @classmethod
    def defaults_for(cls, kind: ModelKind, *, seed: int = 0, train_fraction: float = 0.8) -> 'TrainConfig':
        if kind is ModelKind.LR:
            return cls(learning_rate=0.1, epochs=500, l2_lambda=1e-4, seed=seed, train_fraction=train_fraction)
        if kind is ModelKind.SGD_HINGE:
            return cls(learning_rate=0.01, epochs=50, l2_lambda=1e-4, seed=seed, train_fraction=train_fraction)
        # L-BFGS for the SVC: epochs caps solver iterations, learning_rate is unused.
        return cls(learning_rate=0.01, epochs=500, c_param=1.0, seed=seed, train_fraction=train_fraction)


@dataclass(frozen=True)
class LinearModel:
    kind: ModelKind
    weights: tuple[float, ...]
    bias: float
    scaler_mean: tuple[float, ...]
    scaler_std: tuple[float, ...]
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        dim = len(self.weights)
        if len(self.scaler_mean) != dim or len(self.scaler_std) != dim:
            raise ValidationError("weights and scaler must share one dimension")
        if any(not s > 0 for s in self.scaler_std):
            raise ValidationError("scaler std components must be > 0")

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @classmethod
    def from_dict(cls, data: dict) -> 'LinearModel':
        return cls(
            kind=ModelKind.from_string(data['kind']),
            weights=tuple(float(v) for v in data['weights']),
            bias=float(data['bias']),
            scaler_mean=tuple(float(v) for v in data['scaler_mean']),
            scaler_std=tuple(float(v) for v in data['scaler_std']),
            degenerate=bool(data.get('degenerate', False)),
        )

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'weights': list(self.weights),
            'bias': self.bias,
            'scaler_mean': list(self.scaler_mean),
            'scaler_std': list(self.scaler_std),
            'degenerate': self.degenerate,
        }


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int
    degenerate: bool = False
    note: Optional[str] = None

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        out = {
            'accuracy': self.accuracy,
            'precision': self.precision,
            'recall': self.recall,
            'f1': self.f1,
            'confusion': {'tp': self.tp, 'fp': self.fp, 'tn': self.tn, 'fn': self.fn},
            'degenerate': self.degenerate,
        }
        if self.note:
            out['note'] = self.note
        return out
