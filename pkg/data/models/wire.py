import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from agent_helper.enums import AgentId, ProximityFlag
from errors import ValidationError

from .frames import PROXIMITY_THRESHOLD

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class DistanceReport:
    """Datagram an agent node sends the server once per sample.

    Distances travel as IEEE-754 single precision and are rounded to it on
    construction, so a decoded report equals the one that was encoded.
    ``flags`` bit i is set when anchor i+1's value was held over a lost RSSI
    sample. The checksum is filled in by decode and ignored by equality.
    """
    node_id: int
    seq: int
    timestamp_ms: int
    d1: float
    d2: float
    d3: float
    flags: int = 0
    checksum: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 <= self.node_id <= 0xFF:
            raise ValidationError(f"node_id must fit in one byte, got {self.node_id}")
        if not 0 <= self.seq <= U32_MAX:
            raise ValidationError(f"seq out of range: {self.seq}")
        if not 0 <= self.timestamp_ms <= U64_MAX:
            raise ValidationError(f"timestamp_ms out of range: {self.timestamp_ms}")
        if not 0 <= self.flags <= U32_MAX:
            raise ValidationError(f"flags out of range: {self.flags}")
        for name in ("d1", "d2", "d3"):
            value = float(np.float32(getattr(self, name)))
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0 in single precision, got {getattr(self, name)}")
            object.__setattr__(self, name, value)

    @property
    def agent(self) -> AgentId:
        return AgentId(self.node_id)

    @property
    def distances(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)


@dataclass(frozen=True)
class NavSignal:
    """Navigation flag the server emits for one tick."""
    timestamp_ms: int
    separation_est: float
    ml_close: Optional[bool] = None

    @property
    def flag(self) -> ProximityFlag:
        return ProximityFlag.CLOSE if self.separation_est < PROXIMITY_THRESHOLD else ProximityFlag.SAFE

    def to_dict(self) -> dict:
        out = {'t_ms': self.timestamp_ms, 'flag': self.flag.value, 'sep': self.separation_est}
        if self.ml_close is not None:
            out['ml'] = ProximityFlag.CLOSE.value if self.ml_close else ProximityFlag.SAFE.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> 'NavSignal':
        ml = data.get('ml')
        return cls(
            timestamp_ms=int(data['t_ms']),
            separation_est=float(data['sep']),
            ml_close=None if ml is None else ml == ProximityFlag.CLOSE.value,
        )


@dataclass(frozen=True)
class ChannelConfig:
    drop_probability: float = 0.0
    latency_ticks: int = 0
    seed: int = 0
    corrupt_probability: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValidationError(f"drop_probability must be in [0, 1), got {self.drop_probability}")
        if not 0.0 <= self.corrupt_probability < 1.0:
            raise ValidationError(f"corrupt_probability must be in [0, 1), got {self.corrupt_probability}")
        if self.latency_ticks < 0:
            raise ValidationError(f"latency_ticks must be >= 0, got {self.latency_ticks}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> 'ChannelConfig':
        return cls(
            drop_probability=float(data.get('drop_probability', 0.0)),
            latency_ticks=int(data.get('latency_ticks', 0)),
            seed=int(data.get('seed', 0)),
            corrupt_probability=float(data.get('corrupt_probability', 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            'drop_probability': self.drop_probability,
            'latency_ticks': self.latency_ticks,
            'seed': self.seed,
            'corrupt_probability': self.corrupt_probability,
        }
