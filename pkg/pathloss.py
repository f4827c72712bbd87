"""
Log-distance path-loss model: P = A - 10 n log10(d)

RSSI synthesis with shadowing noise, RSSI -> distance inversion, and the
two-step A / n calibration done per access point.
"""
import logging
import math
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from data.models.radio import NoiseConfig, PathLossParams, RssiSample
from errors import CalibrationError, GeometryError, ValidationError
from rng import make_generator

logger = logging.getLogger("ips.pathloss")

MIN_DISTANCE = 0.01
CALIBRATION_SAMPLES = 500
CALIBRATION_PERIOD = 0.1

Estimator = Literal["mean", "median"]

# Indoor defaults per access point.
DEFAULT_PARAMS: tuple[PathLossParams, ...] = (
    PathLossParams(a_ref=-41.0, n_env=3.2, ap_id=1),
    PathLossParams(a_ref=-44.0, n_env=3.0, ap_id=2),
    PathLossParams(a_ref=-39.5, n_env=3.3, ap_id=3),
)


def noise_stream(noise: NoiseConfig) -> np.random.Generator:
    """Generator for ``noise``; equal seeds give bit-identical streams."""
    return make_generator(noise.seed)


def clamp_distance(d: float) -> float:
    if not math.isfinite(d) or d < 0:
        raise GeometryError(f"distance must be finite and >= 0, got {d}")
    return d if d >= MIN_DISTANCE else MIN_DISTANCE


def distance_to_rssi(
    d: float,
    params: PathLossParams,
    noise: Optional[NoiseConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """RSSI (dBm) heard at distance ``d`` metres.

    A noisy ``noise`` needs ``rng``, the caller's stream for that config
    (see noise_stream); successive calls then draw independent samples.
    """
    d = clamp_distance(d)
    rssi = params.a_ref - 10.0 * params.n_env * math.log10(d)
    if noise is not None and noise.sigma_db > 0:
        if rng is None:
            raise ValidationError("a generator is required when sigma_db > 0")
        rssi += float(rng.normal(0.0, noise.sigma_db))
    return rssi


def rssi_to_distance(p: float, params: PathLossParams) -> float:
    if not math.isfinite(p):
        raise ValidationError(f"rssi must be finite, got {p}")
    d = 10.0 ** ((params.a_ref - p) / (10.0 * params.n_env))
    if not (math.isfinite(d) and d > 0):
        raise GeometryError(f"rssi {p} dBm maps outside the representable range")
    return d


def _estimate(values: Sequence[float], estimator: Estimator) -> float:
    arr = np.asarray(values, dtype=float)
    if estimator == "mean":
        return float(np.mean(arr))
    if estimator == "median":
        return float(np.median(arr))
    raise ValueError(f"unknown estimator: {estimator}")


def calibrate_a(samples: Sequence[RssiSample], estimator: Estimator = "mean") -> float:
    """A from samples taken with the receiver 1 m from the access point."""
    if not samples:
        raise CalibrationError("no samples to calibrate A from")
    return _estimate([s.rssi for s in samples], estimator)


def calibrate_n(
    samples: Sequence[RssiSample],
    a_ref: float,
    d_known: float,
    estimator: Estimator = "mean",
) -> float:
    """Path-loss exponent from samples at a known distance other than 1 m."""
    if not math.isfinite(d_known) or d_known <= 0 or d_known == 1.0:
        raise CalibrationError(f"exponent is unidentifiable at known distance {d_known} m")
    if not samples:
        raise CalibrationError("no samples to calibrate n from")
    n = (a_ref - _estimate([s.rssi for s in samples], estimator)) / (10.0 * math.log10(d_known))
    if not n > 0:
        raise ValidationError(f"calibrated exponent n={n:.4f} is not positive")
    return n


def calibrate_params(
    reference: Sequence[RssiSample],
    known: Sequence[RssiSample],
    d_known: float,
    *,
    ap_id: int = 1,
    estimator: Estimator = "mean",
) -> PathLossParams:
    a_ref = calibrate_a(reference, estimator)
    n_env = calibrate_n(known, a_ref, d_known, estimator)
    logger.info("AP %s calibrated: A=%.3f dBm n=%.4f (%d + %d samples)",
                ap_id, a_ref, n_env, len(reference), len(known))
    return PathLossParams(a_ref=a_ref, n_env=n_env, ap_id=ap_id)


def samples_for_ap(samples: Iterable[RssiSample], ap_id: int) -> list[RssiSample]:
    return [s for s in samples if s.ap_id == ap_id]


def simulate_calibration(
    params: PathLossParams,
    d_known: float,
    noise: NoiseConfig,
    *,
    n_samples: int = CALIBRATION_SAMPLES,
    period: float = CALIBRATION_PERIOD,
    rng: Optional[np.random.Generator] = None,
) -> tuple[list[RssiSample], list[RssiSample]]:
    """Generate a calibration session: samples at 1 m, then at ``d_known``."""
    if n_samples < 1:
        raise CalibrationError("a calibration session needs at least one sample")
    rng = rng or noise_stream(noise)
    reference = [
        RssiSample(timestamp=i * period, ap_id=params.ap_id,
                   rssi=distance_to_rssi(1.0, params, noise, rng))
        for i in range(n_samples)
    ]
    known = [
        RssiSample(timestamp=(n_samples + i) * period, ap_id=params.ap_id,
                   rssi=distance_to_rssi(d_known, params, noise, rng))
        for i in range(n_samples)
    ]
    return reference, known
