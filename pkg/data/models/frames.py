import math
from dataclasses import dataclass

from .location import DistanceVector, Position

PROXIMITY_THRESHOLD = 0.5

DATASET_COLUMNS = (
    "timestamp",
    "hd1", "hd2", "hd3", "rd1", "rd2", "rd3",
    "hx_est", "hy_est", "rx_est", "ry_est", "sep_est",
    "hx_true", "hy_true", "rx_true", "ry_true", "sep_true",
    "label",
)


def proximity_label(separation: float) -> int:
    """1 (close) strictly below the threshold; exactly 0.5 m is safe."""
    return 1 if separation < PROXIMITY_THRESHOLD else 0


@dataclass(frozen=True)
class GroundTruthFrame:
    """True agent positions at one tick. Separation and label are derived."""
    timestamp: float
    human_true: Position
    robot_true: Position

    @property
    def true_separation(self) -> float:
        return math.hypot(self.human_true.x - self.robot_true.x,
                          self.human_true.y - self.robot_true.y)

    @property
    def true_label(self) -> int:
        return proximity_label(self.true_separation)


@dataclass(frozen=True)
class EstimatedFrame:
    timestamp: float
    human_est: Position
    robot_est: Position
    sep_est: float
    residual_human: float = 0.0
    residual_robot: float = 0.0

    @property
    def predicted_label(self) -> int:
        return proximity_label(self.sep_est)


@dataclass(frozen=True)
class DatasetRow:
    """One CSV line of the scenario dataset."""
    truth: GroundTruthFrame
    human: DistanceVector
    robot: DistanceVector
    estimate: EstimatedFrame

    def to_dict(self) -> dict:
        h, r, e, g = self.human, self.robot, self.estimate, self.truth
        return {
            'timestamp': g.timestamp,
            'hd1': h.d1, 'hd2': h.d2, 'hd3': h.d3,
            'rd1': r.d1, 'rd2': r.d2, 'rd3': r.d3,
            'hx_est': e.human_est.x, 'hy_est': e.human_est.y,
            'rx_est': e.robot_est.x, 'ry_est': e.robot_est.y,
            'sep_est': e.sep_est,
            'hx_true': g.human_true.x, 'hy_true': g.human_true.y,
            'rx_true': g.robot_true.x, 'ry_true': g.robot_true.y,
            'sep_true': g.true_separation,
            'label': g.true_label,
        }
