import logging
import math
from dataclasses import dataclass

from errors import ValidationError

logger = logging.getLogger("ips.models.radio")

# Typical indoor 1 m reference RSSI; values outside only warn.
A_REF_TYPICAL_RANGE = (-80.0, -20.0)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance model parameters for one access point.

    a_ref is the RSSI (dBm) heard at 1 m, n_env the path-loss exponent.
    """
    a_ref: float
    n_env: float
    ap_id: int = 1

    def __post_init__(self):
        if not math.isfinite(self.a_ref):
            raise ValidationError(f"a_ref must be finite, got {self.a_ref}")
        if not math.isfinite(self.n_env) or self.n_env <= 0:
            raise ValidationError(f"n_env must be > 0, got {self.n_env}")
        low, high = A_REF_TYPICAL_RANGE
        if not low <= self.a_ref <= high:
            logger.warning("AP %s: a_ref %.2f dBm outside typical range [%s, %s]",
                           self.ap_id, self.a_ref, low, high)

    @classmethod
    def from_dict(cls, data: dict) -> 'PathLossParams':
        return cls(
            a_ref=float(data['a_ref']),
            n_env=float(data['n_env']),
            ap_id=int(data.get('ap_id', 1)),
        )

    def to_dict(self) -> dict:
        return {
            'ap_id': self.ap_id,
            'a_ref': self.a_ref,
            'n_env': self.n_env,
        }


@dataclass(frozen=True)
class RssiSample:
    timestamp: float
    ap_id: int
    rssi: float

    def __post_init__(self):
        if not self.timestamp >= 0:
            raise ValidationError(f"timestamp must be >= 0, got {self.timestamp}")
        if self.ap_id not in (1, 2, 3):
            raise ValidationError(f"ap_id must be 1, 2 or 3, got {self.ap_id}")
        if not math.isfinite(self.rssi):
            raise ValidationError(f"rssi must be finite, got {self.rssi}")


@dataclass(frozen=True)
class NoiseConfig:
    """Shadowing noise in the dB domain plus optional RSSI sample loss.

    sigma_db = 0 reproduces the deterministic model. A lost sample makes the
    receiving node keep its previous reading for that access point.
    """
    sigma_db: float = 2.0
    seed: int = 0
    loss_probability: float = 0.0

    def __post_init__(self):
        if not self.sigma_db >= 0:
            raise ValidationError(f"sigma_db must be >= 0, got {self.sigma_db}")
        if not 0.0 <= self.loss_probability < 1.0:
            raise ValidationError(f"loss_probability must be in [0, 1), got {self.loss_probability}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> 'NoiseConfig':
        return cls(
            sigma_db=float(data.get('sigma_db', 2.0)),
            seed=int(data.get('seed', 0)),
            loss_probability=float(data.get('loss_probability', 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            'sigma_db': self.sigma_db,
            'seed': self.seed,
            'loss_probability': self.loss_probability,
        }
