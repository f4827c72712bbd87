"""
Position fixes from anchor distances.

Closed-form trilateration for the three-anchor layout, a least-squares
multilateration fallback for any number of anchors, and the human-robot
separation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from data.models.location import AnchorLayout, DistanceVector, Position
from errors import GeometryError

logger = logging.getLogger("ips.locator")

LS_MAX_ITERATIONS = 100
LS_STEP_TOLERANCE = 1e-9

AnchorRange = tuple[Sequence[float], float]


@dataclass(frozen=True)
class LeastSquaresFix:
    position: Position
    converged: bool
    iterations: int
    cost: float


def trilaterate(d: DistanceVector, layout: AnchorLayout) -> Position:
    """Intersect the three range circles of anchors (0,0), (x2,0), (0,y3).

    Subtracting the circle equations pairwise leaves two linear equations,
    one per axis. Inconsistent ranges still give a point; see residual().
    """
    x2, y3 = layout.a2_x, layout.a3_y
    x = (x2 * x2 + d.d1 * d.d1 - d.d2 * d.d2) / (2.0 * x2)
    y = (y3 * y3 + d.d1 * d.d1 - d.d3 * d.d3) / (2.0 * y3)
    return Position.in_layout(x, y, layout)


def residual(d: DistanceVector, layout: AnchorLayout, p: Position) -> float:
    """RMS range mismatch of ``p`` against ``d``; 0 for consistent ranges."""
    ranges = np.linalg.norm(layout.anchors - p.as_array(), axis=1)
    return float(np.sqrt(np.mean((ranges - np.asarray(d.distances)) ** 2)))


def separation(h: Position, r: Position) -> float:
    return math.hypot(h.x - r.x, h.y - r.y)


def _linearized_fix(anchors: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    # Circle i minus circle 0 is linear in (x, y).
    a = 2.0 * (anchors[1:] - anchors[0])
    b = (ranges[0] ** 2 - ranges[1:] ** 2
         + np.sum(anchors[1:] ** 2, axis=1) - np.sum(anchors[0] ** 2))
    solution, *_ = np.linalg.lstsq(a, b, rcond=None)
    return solution


def multilaterate_ls(
    distances: Sequence[AnchorRange],
    initial: Optional[Position] = None,
    layout: Optional[AnchorLayout] = None,
) -> LeastSquaresFix:
    """Minimise the sum of squared range residuals with Levenberg-Marquardt.

    Without ``initial`` the search starts from the closed-form fix on the
    first three anchors, which equals trilaterate() on the canonical layout.
    Running out of iterations returns the best iterate, converged=False.
    """
    if len(distances) < 3:
        raise GeometryError(f"need at least 3 anchors, got {len(distances)}")
    anchors = np.array([np.asarray(a, dtype=float) for a, _ in distances])
    ranges = np.array([float(r) for _, r in distances])
    if anchors.shape[1] != 2:
        raise GeometryError("anchors must be 2-D coordinates")
    if np.linalg.matrix_rank(anchors[1:] - anchors[0]) < 2:
        raise GeometryError("anchors are collinear")
    if not np.all(np.isfinite(ranges)) or np.any(ranges <= 0):
        raise GeometryError("ranges must be finite and > 0")

    x0 = initial.as_array() if initial is not None else _linearized_fix(anchors[:3], ranges[:3])

    def fun(p: np.ndarray) -> np.ndarray:
        return np.linalg.norm(p - anchors, axis=1) - ranges

    def jac(p: np.ndarray) -> np.ndarray:
        delta = p - anchors
        norms = np.linalg.norm(delta, axis=1)
        norms[norms == 0] = 1.0
        return delta / norms[:, None]

    result = least_squares(
        fun, x0, jac=jac, method="lm",
        xtol=LS_STEP_TOLERANCE * 1e-3, ftol=1e-15, gtol=1e-15,
        max_nfev=LS_MAX_ITERATIONS,
    )
    converged = result.status > 0
    if not converged:
        logger.warning("multilateration did not converge after %d evaluations", result.nfev)

    x, y = (float(v) for v in result.x)
    position = Position.in_layout(x, y, layout) if layout else Position(x, y)
    return LeastSquaresFix(position=position, converged=converged,
                           iterations=int(result.nfev), cost=float(result.cost))


def layout_ranges(d: DistanceVector, layout: AnchorLayout) -> list[AnchorRange]:
    """Pair the layout's anchors with ``d`` for multilaterate_ls()."""
    return [(tuple(anchor), dist) for anchor, dist in zip(layout.anchors, d.distances)]
