"""Trajectory dissimilarity measures.

Pointwise squared error, swept area between corresponding segments,
and squared error between discrete curvature sequences. All three are
nonnegative and invariant under rigid motions applied to both curves
(translation holds to 1e-9 relative). SSE and CRV are symmetric in
their arguments; the swept area is symmetric whenever no cell between
the curves self-intersects (its split direction is fixed, so crossed
cells depend on argument order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TrajectoryError
from .trajectory import Trajectory


@dataclass(frozen=True)
class MetricReport:
    sse: float
    sea: float
    crv: float

    def __post_init__(self):
        for name in ("sse", "sea", "crv"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def as_dict(self) -> dict:
        return {"sse": self.sse, "sea": self.sea, "crv": self.crv}


def _check_lengths(a: Trajectory, b: Trajectory):
    if a.length != b.length:
        raise TrajectoryError(
            f"trajectory lengths differ: {a.length} vs {b.length}"
        )


def sse(a: Trajectory, b: Trajectory) -> float:
    """Sum of squared pointwise distances."""
    _check_lengths(a, b)
    if a.dim != b.dim:
        raise TrajectoryError(f"trajectory dimensions differ: {a.dim} vs {b.dim}")
    d = a.points - b.points
    return float(np.sum(d * d))


def _triangle_areas(p0, p1, p2):
    # robust in any ambient dimension: Gram determinant form
    u = p1 - p0
    v = p2 - p0
    uu = np.einsum("ti,ti->t", u, u)
    vv = np.einsum("ti,ti->t", v, v)
    uv = np.einsum("ti,ti->t", u, v)
    g = np.maximum(uu * vv - uv * uv, 0.0)
    return 0.5 * np.sqrt(g)


def sea(a: Trajectory, b: Trajectory) -> float:
    """Area swept between corresponding segments, summed over time.

    Each cell (a_t, a_{t+1}, b_{t+1}, b_t) is split along the
    (a_t, b_{t+1}) diagonal and the two triangle areas are added, so
    self-intersecting cells still count their full unsigned area.
    """
    _check_lengths(a, b)
    if a.dim != b.dim:
        raise TrajectoryError(f"trajectory dimensions differ: {a.dim} vs {b.dim}")
    if a.dim not in (2, 3):
        raise TrajectoryError(f"swept area needs 2-D or 3-D points, got {a.dim}-D")
    pa, pb = a.points, b.points
    t1 = _triangle_areas(pa[:-1], pa[1:], pb[1:])
    t2 = _triangle_areas(pa[:-1], pb[1:], pb[:-1])
    return float(np.sum(t1) + np.sum(t2))


def curvature_profile(traj: Trajectory) -> np.ndarray:
    """Discrete curvature at every point via circumscribed circles.

    kappa = 4 * triangle area / product of the three side lengths for
    each interior triple; endpoints copy their neighbor. Collinear and
    coincident triples get curvature 0.
    """
    if traj.length < 3:
        raise TrajectoryError(f"curvature needs T >= 3, got {traj.length}")
    p = traj.points
    area = _triangle_areas(p[:-2], p[1:-1], p[2:])
    s0 = np.linalg.norm(p[1:-1] - p[:-2], axis=1)
    s1 = np.linalg.norm(p[2:] - p[1:-1], axis=1)
    s2 = np.linalg.norm(p[2:] - p[:-2], axis=1)
    denom = s0 * s1 * s2
    kappa = np.zeros(traj.length)
    ok = denom > 0
    kappa[1:-1][ok] = 4.0 * area[ok] / denom[ok]
    kappa[0] = kappa[1]
    kappa[-1] = kappa[-2]
    return kappa


def crv(a: Trajectory, b: Trajectory) -> float:
    """Squared error between the two discrete curvature sequences."""
    _check_lengths(a, b)
    ka = curvature_profile(a)
    kb = curvature_profile(b)
    d = ka - kb
    return float(np.sum(d * d))


def evaluate(a: Trajectory, b: Trajectory) -> MetricReport:
    """All three measures for one pair of equal-length trajectories."""
    return MetricReport(sse=sse(a, b), sea=sea(a, b), crv=crv(a, b))
