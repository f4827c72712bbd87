import math
from dataclasses import dataclass, field

import numpy as np

from agent_helper.enums import AgentId
from errors import ValidationError

# Points this close outside the arena still count as inside.
BOUNDS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AnchorLayout:
    """Three access points at (0, 0), (a2_x, 0) and (0, a3_y).

    The arena defaults to the rectangle spanned by the anchors.
    """
    a2_x: float = 3.0
    a3_y: float = 3.0
    arena_width: float | None = None
    arena_height: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.a2_x) and self.a2_x > 0):
            raise ValidationError(f"a2_x must be > 0, got {self.a2_x}")
        if not (math.isfinite(self.a3_y) and self.a3_y > 0):
            raise ValidationError(f"a3_y must be > 0, got {self.a3_y}")
        for name in ("arena_width", "arena_height"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValidationError(f"{name} must be > 0, got {value}")

    @property
    def width(self) -> float:
        return self.arena_width if self.arena_width is not None else self.a2_x

    @property
    def height(self) -> float:
        return self.arena_height if self.arena_height is not None else self.a3_y

    @property
    def anchors(self) -> np.ndarray:
        return np.array([[0.0, 0.0], [self.a2_x, 0.0], [0.0, self.a3_y]])

    def contains(self, x: float, y: float) -> bool:
        return (-BOUNDS_TOLERANCE <= x <= self.width + BOUNDS_TOLERANCE
                and -BOUNDS_TOLERANCE <= y <= self.height + BOUNDS_TOLERANCE)

    @classmethod
    def from_dict(cls, data: dict) -> 'AnchorLayout':
        return cls(
            a2_x=float(data.get('a2_x', 3.0)),
            a3_y=float(data.get('a3_y', 3.0)),
            arena_width=data.get('arena_width'),
            arena_height=data.get('arena_height'),
        )

    def to_dict(self) -> dict:
        out = {'a2_x': self.a2_x, 'a3_y': self.a3_y}
        if self.arena_width is not None:
            out['arena_width'] = self.arena_width
        if self.arena_height is not None:
            out['arena_height'] = self.arena_height
        return out


@dataclass(frozen=True)
class Position:
    """A fix in the anchor frame; out-of-arena points are flagged, never clipped."""
    x: float
    y: float
    out_of_bounds: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"position must be finite, got ({self.x}, {self.y})")

    @classmethod
    def in_layout(cls, x: float, y: float, layout: AnchorLayout) -> 'Position':
        return cls(x=float(x), y=float(y), out_of_bounds=not layout.contains(x, y))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def shifted(self, dx: float, dy: float) -> 'Position':
        return Position(self.x + dx, self.y + dy, self.out_of_bounds)

    def to_dict(self) -> dict:
        return {'x': self.x, 'y': self.y, 'out_of_bounds': self.out_of_bounds}

    def __repr__(self) -> str:
        flag = ", OOB" if self.out_of_bounds else ""
        return f"Position({self.x:.4f}, {self.y:.4f}{flag})"


@dataclass(frozen=True)
class DistanceVector:
    """One agent's estimated distances to anchors 1..3 at one instant.

    ``held`` marks anchors whose value was carried over from an earlier
    sample because the RSSI reading was lost.
    """
    agent_id: AgentId
    timestamp: float
    d1: float
    d2: float
    d3: float
    held: tuple[bool, bool, bool] = field(default=(False, False, False), compare=False)

    def __post_init__(self):
        for name, value in (("d1", self.d1), ("d2", self.d2), ("d3", self.d3)):
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{self.agent_id.label} {name} must be finite and > 0, got {value}")

    @property
    def distances(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)

    def quantized(self) -> 'DistanceVector':
        """Round to single precision, the resolution anchor nodes report at."""
        d1, d2, d3 = (float(v) for v in np.asarray(self.distances, dtype=np.float32))
        return DistanceVector(self.agent_id, self.timestamp, d1, d2, d3, self.held)
