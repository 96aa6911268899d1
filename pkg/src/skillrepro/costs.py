"""Cost terms for skill reproduction.

Quadratic attraction to the successful regression path, weighted
quadratic repulsion from the failed one, elastic (spring) energy,
quadratic constraint penalties, and the signed Gaussian success-field
cost. Every term has an analytic gradient; the optimizer consumes
both, and tests check the gradients against central differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConstraintError, TrajectoryError
from .mixture import RegressedPath
from .trajectory import Trajectory


@dataclass(frozen=True)
class ConstraintSet:
    """Indexed equality constraints (initial/final/via points).

    entries are (timestep index, target point) pairs; rho is the
    penalty constant. Smaller rho enforces the constraints harder.
    """

    entries: tuple[tuple[int, np.ndarray], ...]
    rho: float = 1e-3

    def __post_init__(self):
        if self.rho <= 0:
            raise ConstraintError(f"rho must be positive, got {self.rho}")
        norm: list[tuple[int, np.ndarray]] = []
        prev = -1
        for idx, point in self.entries:
            idx = int(idx)
            pt = np.asarray(point, dtype=float).ravel()
            if idx <= prev:
                raise ConstraintError("constraint indices must be strictly increasing")
            if not np.all(np.isfinite(pt)):
                raise ConstraintError(f"non-finite constraint target at index {idx}")
            if norm and len(pt) != len(norm[0][1]):
                raise ConstraintError("constraint targets have mixed dimensions")
            pt.setflags(write=False)
            norm.append((idx, pt))
            prev = idx
        object.__setattr__(self, "entries", tuple(norm))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, Sequence[float]]], rho: float = 1e-3):
        return cls(tuple((i, np.asarray(p, dtype=float)) for i, p in pairs), rho=rho)

    @property
    def size(self) -> int:
        return len(self.entries)

    def dim(self) -> int | None:
        return len(self.entries[0][1]) if self.entries else None

    def check_range(self, length: int):
        for idx, _ in self.entries:
            if idx < 0 or idx >= length:
                raise ConstraintError(f"constraint index {idx} outside [0, {length})")

    def max_residual(self, traj: Trajectory) -> float:
        self.check_range(traj.length)
        if not self.entries:
            return 0.0
        return max(
            float(np.linalg.norm(traj.points[i] - p)) for i, p in self.entries
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Scalarized objective split into its signed parts."""

    success_term: float
    failure_term: float
    elastic_term: float
    penalty_term: float
    total: float

    def __post_init__(self):
        expected = (
            self.success_term - self.failure_term
            + self.elastic_term + self.penalty_term
        )
        if abs(expected - self.total) > 1e-9 * max(1.0, abs(expected)):
            raise ValueError(
                f"inconsistent breakdown: total {self.total} vs parts {expected}"
            )

    def as_dict(self) -> dict:
        return {
            "success_term": self.success_term,
            "failure_term": self.failure_term,
            "elastic_term": self.elastic_term,
            "penalty_term": self.penalty_term,
            "total": self.total,
        }


def _check_match(X: Trajectory, path: RegressedPath):
    if X.length != path.length or X.dim != path.dim:
        raise TrajectoryError(
            f"trajectory ({X.length}, {X.dim}) does not match path "
            f"({path.length}, {path.dim})"
        )


def quad_cost(X: Trajectory, path: RegressedPath) -> float:
    """Block-diagonal Mahalanobis cost sum_t (x_t - m_t)^T S_t^-1 (x_t - m_t)."""
    _check_match(X, path)
    r = X.points - path.means
    return float(np.einsum("ti,tij,tj->", r, path.inverse_covariances, r))


def quad_cost_grad(X: Trajectory, path: RegressedPath) -> np.ndarray:
    _check_match(X, path)
    r = X.points - path.means
    return 2.0 * np.einsum("tij,tj->ti", path.inverse_covariances, r)


def dissimilarity_weights(m_s: np.ndarray, m_f: np.ndarray) -> np.ndarray:
    """Per-timestep L2 distance between the two means, scaled to max 1.

    An all-zero vector comes back when the means coincide everywhere.
    """
    a = np.asarray(m_s, dtype=float)
    b = np.asarray(m_f, dtype=float)
    if a.shape != b.shape:
        raise TrajectoryError(f"mean shapes differ: {a.shape} vs {b.shape}")
    w = np.linalg.norm(a - b, axis=1)
    peak = w.max()
    if peak <= 0.0:
        return np.zeros_like(w)
    return w / peak


def weighted_failure_quad(X: Trajectory, path_f: RegressedPath,
                          w_sim: np.ndarray) -> float:
    """sum_t w_t (x_t - m_f(t))^T S_f(t)^-1 (x_t - m_f(t))."""
    _check_match(X, path_f)
    r = X.points - path_f.means
    per_t = np.einsum("ti,tij,tj->t", r, path_f.inverse_covariances, r)
    return float(np.dot(np.asarray(w_sim, dtype=float), per_t))


def weighted_failure_quad_grad(X: Trajectory, path_f: RegressedPath,
                               w_sim: np.ndarray) -> np.ndarray:
    _check_match(X, path_f)
    r = X.points - path_f.means
    g = 2.0 * np.einsum("tij,tj->ti", path_f.inverse_covariances, r)
    return np.asarray(w_sim, dtype=float)[:, None] * g


def combined_quad(X: Trajectory, path_s: RegressedPath | None,
                  path_f: RegressedPath | None, w_sim: np.ndarray | None,
                  gamma: float = 1.0) -> float:
    """Success attraction minus weighted failure repulsion.

    Either path may be absent (its term is dropped); both absent is an
    error.
    """
    if path_s is None and path_f is None:
        raise TrajectoryError("combined_quad needs at least one regression path")
    value = 0.0
    if path_s is not None:
        value += quad_cost(X, path_s)
    if path_f is not None:
        if w_sim is None:
            raise TrajectoryError("w_sim is required when a failed path is present")
        value -= gamma * weighted_failure_quad(X, path_f, w_sim)
    return value


def combined_quad_grad(X: Trajectory, path_s: RegressedPath | None,
                       path_f: RegressedPath | None, w_sim: np.ndarray | None,
                       gamma: float = 1.0) -> np.ndarray:
    if path_s is None and path_f is None:
        raise TrajectoryError("combined_quad needs at least one regression path")
    g = np.zeros_like(X.points)
    if path_s is not None:
        g = g + quad_cost_grad(X, path_s)
    if path_f is not None:
        g = g - gamma * weighted_failure_quad_grad(X, path_f, w_sim)
    return g


def elastic_energy(X: Trajectory, lam: float) -> float:
    """Spring energy (lam / 2) sum ||x_i - x_{i-1}||^2."""
    if lam < 0:
        raise TrajectoryError(f"lambda must be >= 0, got {lam}")
    d = np.diff(X.points, axis=0)
    return float(0.5 * lam * np.sum(d * d))


def elastic_energy_grad(X: Trajectory, lam: float) -> np.ndarray:
    g = np.zeros_like(X.points)
    d = np.diff(X.points, axis=0)
    g[:-1] -= lam * d
    g[1:] += lam * d
    return g


def penalty(X: Trajectory, cs: ConstraintSet) -> float:
    """Quadratic penalty (1 / 2 rho) sum_i ||x_{t_i} - p_i||^2."""
    cs.check_range(X.length)
    total = 0.0
    for idx, target in cs.entries:
        r = X.points[idx] - target
        total += float(np.dot(r, r))
    return 0.5 * total / cs.rho


def penalty_grad(X: Trajectory, cs: ConstraintSet) -> np.ndarray:
    cs.check_range(X.length)
    g = np.zeros_like(X.points)
    for idx, target in cs.entries:
        g[idx] += (X.points[idx] - target) / cs.rho
    return g


@dataclass(frozen=True)
class SuccessField:
    """Signed per-timestep Gaussian success model over demonstrations.

    centers[d, t] is demonstration d's point at timestep t; signs are
    +1 for successful and -1 for failed demonstrations; sigma is the
    shared isotropic spread. The attractor gain multiplies the
    exponential constraint term; spring_k scales the spring energy.
    """

    centers: np.ndarray            # (D, T, n)
    signs: np.ndarray              # (D,)
    sigma: float = 0.1
    attractor_gain: float = 100.0
    spring_k: float = 1.0

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        signs = np.asarray(self.signs, dtype=float)
        if self.sigma <= 0:
            raise TrajectoryError(f"sigma must be positive, got {self.sigma}")
        if centers.ndim != 3:
            raise TrajectoryError("centers must have shape (D, T, n)")
        if signs.shape != (centers.shape[0],):
            raise TrajectoryError("one sign per demonstration required")
        if not np.all(np.isin(signs, (-1.0, 1.0))):
            raise TrajectoryError("signs must be +1 or -1")
        centers = centers.copy()
        signs = signs.copy()
        centers.setflags(write=False)
        signs.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "signs", signs)


def _field_signed_sum(X: Trajectory, field: SuccessField):
    D, T, n = field.centers.shape
    sigmas = np.full((D, T), field.sigma)
    return _kernels.signed_gaussian_field(
        np.ascontiguousarray(X.points), np.ascontiguousarray(field.centers),
        np.ascontiguousarray(field.signs), sigmas,
    )


def success_field_terms(X: Trajectory, field: SuccessField,
                        attractors: ConstraintSet) -> tuple[float, float, float]:
    """(G, K, S) pieces of the success-field cost G + K - S."""
    if (X.length, X.dim) != field.centers.shape[1:]:
        raise TrajectoryError("trajectory and field shapes disagree")
    attractors.check_range(X.length)
    G = 0.0
    for idx, target in attractors.entries:
        G += float(np.exp(np.linalg.norm(X.points[idx] - target)))
    G *= field.attractor_gain
    d = np.diff(X.points, axis=0)
    K = 0.5 * field.spring_k * float(np.sum(d * d))
    S, _ = _field_signed_sum(X, field)
    return G, K, S


def success_field_cost(X: Trajectory, field: SuccessField,
                       attractors: ConstraintSet) -> float:
    """G + K - S: attractor satisfaction, spring energy, signed success mass."""
    G, K, S = success_field_terms(X, field, attractors)
    return G + K - S


def success_field_grad(X: Trajectory, field: SuccessField,
                       attractors: ConstraintSet) -> np.ndarray:
    if (X.length, X.dim) != field.centers.shape[1:]:
        raise TrajectoryError("trajectory and field shapes disagree")
    attractors.check_range(X.length)
    g = np.zeros_like(X.points)
    for idx, target in attractors.entries:
        r = X.points[idx] - target
        dist = float(np.linalg.norm(r))
        if dist > 0.0:
            g[idx] += field.attractor_gain * np.exp(dist) * r / dist
    d = np.diff(X.points, axis=0)
    g[:-1] -= field.spring_k * d
    g[1:] += field.spring_k * d
    _, s_grad = _field_signed_sum(X, field)
    return g - s_grad


@dataclass(frozen=True)
class GaussianRepulsion:
    """Bounded repulsion from a failed regression path.

    Replaces the unbounded negative quadratic when no successful
    demonstrations exist: gain * sum_t N(x_t; c_t, sigma_t), a signed
    Gaussian mass centered on the failed mean with spreads taken from
    the failed covariance diagonals (floored to stay effective).
    """

    centers: np.ndarray   # (T, n)
    sigmas: np.ndarray    # (T,)
    gain: float = 1.0

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        sigmas = np.asarray(self.sigmas, dtype=float)
        if sigmas.shape != (centers.shape[0],):
            raise TrajectoryError("one sigma per timestep required")
        if np.any(sigmas <= 0):
            raise TrajectoryError("repulsion sigmas must be positive")
        centers = centers.copy()
        sigmas = sigmas.copy()
        centers.setflags(write=False)
        sigmas.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "sigmas", sigmas)

    @classmethod
    def from_failed_path(cls, path: RegressedPath, sigma_floor: float,
                         gain: float = 1.0) -> "GaussianRepulsion":
        spread = np.sqrt(np.mean(np.diagonal(path.covariances, axis1=1, axis2=2), axis=1))
        return cls(centers=path.means, sigmas=np.maximum(spread, sigma_floor), gain=gain)

    def value_grad(self, points: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = _kernels.signed_gaussian_field(
            np.ascontiguousarray(points), self.centers[None, :, :],
            np.ones(1), self.sigmas[None, :],
        )
        return self.gain * value, self.gain * grad
