"""Trajectory reproduction by block-banded quadratic optimization.

The scalarized objective (attraction, repulsion, elastic energy,
constraint penalties, optionally over several differential coordinate
frames) is assembled into V(X) = 0.5 x^T H x + b^T x + c with H
symmetric block-banded. SPD problems are solved directly with a banded
Cholesky; bounded-repulsion and indefinite problems fall back to
projected descent inside a trust box.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .costs import (
    ConstraintSet,
    CostBreakdown,
    GaussianRepulsion,
    dissimilarity_weights,
    elastic_energy,
    penalty,
    quad_cost,
    weighted_failure_quad,
)
from .errors import ConstraintError, InsufficientDataError, SolveError, TrajectoryError
from .mixture import FitConfig, MixtureModel, RegressedPath, gmr, select_k_bic
from .trajectory import (
    CoordinateFrame,
    Demonstration,
    DemonstrationSet,
    Label,
    Trajectory,
    align_set,
    frame_row_support,
    to_frame,
)

_FRAME_SLOT = {
    CoordinateFrame.CARTESIAN: 0,
    CoordinateFrame.TANGENT: 1,
    CoordinateFrame.LAPLACIAN: 2,
}


@dataclass(frozen=True)
class MultiCoordWeights:
    """Scalarization weights for the coordinate frames."""

    cartesian: float = 1.0
    tangent: float = 0.0
    laplacian: float = 0.0

    def __post_init__(self):
        for name in ("cartesian", "tangent", "laplacian"):
            if getattr(self, name) < 0:
                raise SolveError(f"{name} weight must be >= 0")
        if self.cartesian + self.tangent + self.laplacian <= 0:
            raise SolveError("at least one frame weight must be positive")

    def active(self) -> tuple[tuple[CoordinateFrame, float], ...]:
        pairs = (
            (CoordinateFrame.CARTESIAN, self.cartesian),
            (CoordinateFrame.TANGENT, self.tangent),
            (CoordinateFrame.LAPLACIAN, self.laplacian),
        )
        return tuple((f, w) for f, w in pairs if w > 0)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cartesian, self.tangent, self.laplacian)


@dataclass(frozen=True)
class SolverConfig:
    """Reproduction settings; defaults suit unit-scale demonstrations."""

    resample_len: int = 100
    lam: float = 0.01
    rho: float = 1e-3
    gamma: float = 1.0
    weights: MultiCoordWeights = MultiCoordWeights()
    k_range: tuple[int, int] = (1, 6)
    seed: int = 0
    restarts: int = 5
    max_em_iters: int = 200
    em_tol: float = 1e-7
    cov_floor_rel: float = 1e-6
    max_solver_iters: int = 2000
    grad_tol: float = 1e-6
    trust_factor: float = 2.0
    repulsion_sigma_floor: float = 0.1
    repulsion_gain: float = 1.0
    init_jitter_rel: float = 0.05

    def __post_init__(self):
        if self.resample_len < 2:
            raise SolveError("resample_len must be >= 2")
        if self.lam < 0:
            raise SolveError("lam must be >= 0")
        if self.rho <= 0:
            raise SolveError("rho must be positive")
        if self.gamma < 0:
            raise SolveError("gamma must be >= 0")
        if self.seed < 0:
            raise SolveError("seed must be >= 0")
        if self.max_solver_iters < 1:
            raise SolveError("max_solver_iters must be >= 1")
        if self.grad_tol <= 0 or self.trust_factor <= 0:
            raise SolveError("grad_tol and trust_factor must be positive")
        if self.repulsion_sigma_floor <= 0 or self.repulsion_gain <= 0:
            raise SolveError("repulsion settings must be positive")
        if self.init_jitter_rel < 0:
            raise SolveError("init_jitter_rel must be >= 0")

    def fit_config(self, seed: int) -> FitConfig:
        return FitConfig(
            k_range=self.k_range,
            max_em_iters=self.max_em_iters,
            tol=self.em_tol,
            cov_floor_rel=self.cov_floor_rel,
            restarts=self.restarts,
            seed=seed,
        )


@dataclass(frozen=True)
class FrameModel:
    """Fitted evidence for one coordinate frame.

    The failure quadratic participates only when w_sim is present; a
    failure path without weights is informational (repulsion regime).
    """

    frame: CoordinateFrame
    weight: float
    path_success: RegressedPath | None
    path_failure: RegressedPath | None
    w_sim: np.ndarray | None
    model_success: MixtureModel | None = None
    model_failure: MixtureModel | None = None

    def __post_init__(self):
        if self.weight <= 0:
            raise SolveError("frame weight must be positive")
        if self.w_sim is not None:
            w = np.asarray(self.w_sim, dtype=float).copy()
            if self.path_failure is None or w.shape != (self.path_failure.length,):
                raise SolveError("w_sim must align with the failure path")
            w.setflags(write=False)
            object.__setattr__(self, "w_sim", w)


class SolveStatus(Enum):
    DIRECT = "DirectSolve"
    ITERATIVE_CONVERGED = "IterativeConverged"
    ITERATIVE_MAX_ITERS = "IterativeMaxIters"
    INDEFINITE_FALLBACK = "IndefiniteFallback"


@dataclass(frozen=True)
class SolverReport:
    status: SolveStatus
    iterations: int
    initial_cost: float
    final_cost: float
    gradient_norm: float
    constraint_residual: float
    backend: str

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "initial_cost": self.initial_cost,
            "final_cost": self.final_cost,
            "gradient_norm": self.gradient_norm,
            "constraint_residual": self.constraint_residual,
            "backend": self.backend,
        }


@dataclass(frozen=True)
class QuadraticProblem:
    """V(X) = 0.5 x^T H x + b^T x + c with block-banded symmetric H.

    diags[o][t] holds the block H[t+o, t] (lower diagonals only; the
    o = 0 diagonal blocks are stored in full). An optional bounded
    repulsion term is added on top of the quadratic.
    """

    diags: np.ndarray        # (bw + 1, T, n, n)
    linear: np.ndarray       # (T, n)
    constant: float
    constraints: ConstraintSet
    repulsion: GaussianRepulsion | None = None

    @property
    def length(self) -> int:
        return self.linear.shape[0]

    @property
    def dim(self) -> int:
        return self.linear.shape[1]

    @property
    def block_bandwidth(self) -> int:
        return self.diags.shape[0] - 1

    def hess_apply(self, x: np.ndarray) -> np.ndarray:
        T = self.length
        y = np.einsum("tij,tj->ti", self.diags[0], x)
        for o in range(1, self.diags.shape[0]):
            Do = self.diags[o][: T - o]
            y[o:] += np.einsum("tij,tj->ti", Do, x[:-o])
            y[:-o] += np.einsum("tij,ti->tj", Do, x[o:])
        return y

    def quad_value(self, x: np.ndarray) -> float:
        hx = self.hess_apply(x)
        return float(0.5 * np.sum(x * hx) + np.sum(self.linear * x) + self.constant)

    def value(self, x: np.ndarray) -> float:
        v = self.quad_value(x)
        if self.repulsion is not None:
            rv, _ = self.repulsion.value_grad(x)
            v += rv
        return v

    def grad(self, x: np.ndarray) -> np.ndarray:
        g = self.hess_apply(x) + self.linear
        if self.repulsion is not None:
            _, rg = self.repulsion.value_grad(x)
            g = g + rg
        return g

    def to_scalar_banded(self) -> np.ndarray:
        """LAPACK lower banded storage ab[r, j] = H[j + r, j]."""
        T, n = self.length, self.dim
        bw = self.block_bandwidth
        band = bw * n + (n - 1)
        ab = np.zeros((band + 1, T * n))
        for o in range(bw + 1):
            blocks = self.diags[o]
            for p in range(n):
                for q in range(n):
                    r = o * n + p - q
                    if r < 0:
                        continue  # upper part of a diagonal block; symmetric
                    ab[r, q : q + (T - o) * n : n] = blocks[: T - o, p, q]
        return ab

    def dense_matrix(self) -> np.ndarray:
        T, n = self.length, self.dim
        H = np.zeros((T * n, T * n))
        for o in range(self.block_bandwidth + 1):
            for t in range(T - o):
                B = self.diags[o][t]
                H[(t + o) * n : (t + o + 1) * n, t * n : (t + 1) * n] += B
                if o > 0:
                    H[t * n : (t + 1) * n, (t + o) * n : (t + o + 1) * n] += B.T
        return H


@dataclass(frozen=True)
class Reproduction:
    trajectory: Trajectory
    cost: CostBreakdown
    report: SolverReport
    frames: tuple[FrameModel, ...]
    config: SolverConfig


def _accumulate_quad(diags, linear, rows, A, m) -> float:
    """Add sum_t (y_t - m_t)^T A_t (y_t - m_t) with y_t = sum_i c_i x_i.

    A may be sign-indefinite (failure repulsion enters negated).
    Returns the constant part of the expansion.
    """
    const = 0.0
    for t, row in enumerate(rows):
        At = A[t]
        mt = m[t]
        Am = At @ mt
        const += float(mt @ Am)
        for i, ci in row:
            linear[i] += (-2.0 * ci) * Am
            for j, cj in row:
                if i < j:
                    continue  # transpose covered by the (j, i) pair
                diags[i - j][j] += (2.0 * ci * cj) * At
    return const


def assemble(frames: Sequence[FrameModel], constraints: ConstraintSet,
             length: int, dim: int, lam: float, gamma: float,
             repulsion: GaussianRepulsion | None = None) -> QuadraticProblem:
    """Build the block-banded quadratic from fitted frames and penalties."""
    constraints.check_range(length)
    bw = 1 if lam > 0 else 0
    for fm in frames:
        if fm.frame is CoordinateFrame.TANGENT:
            bw = max(bw, 1)
        elif fm.frame is CoordinateFrame.LAPLACIAN:
            bw = max(bw, 2)
    diags = np.zeros((bw + 1, length, dim, dim))
    linear = np.zeros((length, dim))
    const = 0.0

    for fm in frames:
        for path in (fm.path_success, fm.path_failure):
            if path is not None and (path.length, path.dim) != (length, dim):
                raise TrajectoryError(
                    f"frame path shape ({path.length}, {path.dim}) does not "
                    f"match problem shape ({length}, {dim})"
                )
        rows = frame_row_support(fm.frame, length)
        if fm.path_success is not None:
            A = fm.weight * fm.path_success.inverse_covariances
            const += _accumulate_quad(diags, linear, rows, A, fm.path_success.means)
        if fm.path_failure is not None and fm.w_sim is not None:
            A = (-gamma * fm.weight * fm.w_sim[:, None, None]) \
                * fm.path_failure.inverse_covariances
            const += _accumulate_quad(diags, linear, rows, A, fm.path_failure.means)

    if lam > 0:
        eye = lam * np.eye(dim)
        for t in range(length - 1):
            diags[0][t] += eye
            diags[0][t + 1] += eye
            diags[1][t] -= eye

    for idx, target in constraints.entries:
        diags[0][idx] += np.eye(dim) / constraints.rho
        linear[idx] -= target / constraints.rho
        const += float(target @ target) / (2.0 * constraints.rho)

    if repulsion is not None and repulsion.centers.shape != (length, dim):
        raise TrajectoryError("repulsion centers do not match the problem shape")
    return QuadraticProblem(diags=diags, linear=linear, constant=const,
                            constraints=constraints, repulsion=repulsion)


def _trust_box(problem: QuadraticProblem, x0: np.ndarray,
               config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    refs = [x0]
    refs.extend(p[None, :] for _, p in problem.constraints.entries)
    pts = np.vstack(refs)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    if diag <= 0:
        diag = 1.0
    margin = config.trust_factor * diag
    return lo - margin, hi + margin


def _iterate(problem: QuadraticProblem, x0: np.ndarray, config: SolverConfig,
             direction: Callable[[np.ndarray], np.ndarray],
             lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, int, bool]:
    x = np.clip(np.array(x0, dtype=float), lo, hi)
    f = problem.value(x)
    g = problem.grad(x)
    tol = config.grad_tol * (1.0 + float(np.max(np.abs(g))))
    iters = 0
    while float(np.max(np.abs(g))) > tol and iters < config.max_solver_iters:
        iters += 1
        d = direction(g)
        if float(np.sum(d * g)) >= 0.0:
            d = -g  # preconditioner produced an ascent direction
        step = 1.0
        moved = False
        for _ in range(60):
            cand = np.clip(x + step * d, lo, hi)
            delta = cand - x
            if not np.any(delta):
                break  # fully blocked by the trust box
            slope = float(np.sum(g * delta))
            fc = problem.value(cand)
            if slope < 0.0 and fc <= f + 1e-4 * slope:
                x, f = cand, fc
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        g = problem.grad(x)
    converged = float(np.max(np.abs(g))) <= tol
    return x, iters, converged


def _banded_direction(problem: QuadraticProblem) -> Callable | None:
    """Newton-like direction -H^-1 g via banded Cholesky, if H factors."""
    ab = problem.to_scalar_banded()
    probe = np.zeros(ab.shape[1])
    try:
        _kernels.banded_spd_solve(ab, probe)
    except np.linalg.LinAlgError:
        tau = 1e-8 * (1.0 + float(np.max(np.abs(ab[0]))))
        ab = ab.copy()
        ab[0] += tau
        try:
            _kernels.banded_spd_solve(ab, probe)
        except np.linalg.LinAlgError:
            return None

    def direction(g: np.ndarray) -> np.ndarray:
        return -_kernels.banded_spd_solve(ab, np.ascontiguousarray(g.ravel())).reshape(g.shape)

    return direction


def _plain_direction(problem: QuadraticProblem) -> Callable:
    # crude Lipschitz guess from the diagonal keeps the first step sane
    md = float(np.max(np.abs(np.einsum("tii->ti", problem.diags[0]))))
    scale = 1.0 / (1.0 + md)

    def direction(g: np.ndarray) -> np.ndarray:
        return -scale * g

    return direction


def solve(problem: QuadraticProblem, x0: np.ndarray,
          config: SolverConfig) -> tuple[Trajectory, SolverReport]:
    """Minimize the assembled objective starting from x0."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.length, problem.dim):
        raise SolveError(
            f"x0 shape {x0.shape} does not match problem "
            f"({problem.length}, {problem.dim})"
        )
    initial = problem.value(x0)
    lo, hi = _trust_box(problem, x0, config)

    if problem.repulsion is None:
        try:
            ab = problem.to_scalar_banded()
            flat = _kernels.banded_spd_solve(ab, np.ascontiguousarray(-problem.linear.ravel()))
            pts = np.asarray(flat).reshape(problem.length, problem.dim)
            status = SolveStatus.DIRECT
            iters = 0
        except np.linalg.LinAlgError:
            pts, iters, _ = _iterate(problem, x0, config,
                                     _plain_direction(problem), lo, hi)
            status = SolveStatus.INDEFINITE_FALLBACK
    else:
        direction = _banded_direction(problem) or _plain_direction(problem)
        pts, iters, converged = _iterate(problem, x0, config, direction, lo, hi)
        status = (SolveStatus.ITERATIVE_CONVERGED if converged
                  else SolveStatus.ITERATIVE_MAX_ITERS)

    traj = Trajectory(pts)
    final = problem.value(pts)
    gnorm = float(np.max(np.abs(problem.grad(pts))))
    report = SolverReport(
        status=status,
        iterations=iters,
        initial_cost=initial,
        final_cost=final,
        gradient_norm=gnorm,
        constraint_residual=problem.constraints.max_residual(traj),
        backend=_kernels.backend_name(),
    )
    return traj, report


def _fit_subset(trajs: Sequence[Trajectory], frame: CoordinateFrame,
                subset_idx: int, config: SolverConfig, state: np.ndarray,
                length: int) -> tuple[MixtureModel, RegressedPath]:
    seed = int(state[_FRAME_SLOT[frame] * 2 + subset_idx])
    model = select_k_bic(trajs, config.fit_config(seed))
    path = gmr(model, np.linspace(0.0, 1.0, length))
    return model, path


def _constraint_interpolant(constraints: ConstraintSet, length: int,
                            dim: int) -> np.ndarray:
    idxs = np.array([i for i, _ in constraints.entries], dtype=float)
    pts = np.vstack([p for _, p in constraints.entries])
    grid = np.arange(length, dtype=float)
    out = np.empty((length, dim))
    for j in range(dim):
        out[:, j] = np.interp(grid, idxs, pts[:, j])
    return out


def _initial_guess(aligned: DemonstrationSet, frames: Sequence[FrameModel],
                   constraints: ConstraintSet, length: int, dim: int) -> np.ndarray:
    if aligned.successes:
        for fm in frames:
            if fm.frame is CoordinateFrame.CARTESIAN and fm.path_success is not None:
                return fm.path_success.means.copy()
        return np.mean([d.trajectory.points for d in aligned.successes], axis=0)
    if constraints.size >= 2:
        return _constraint_interpolant(constraints, length, dim)
    # reflect the failed evidence through its chord to start away from it
    for fm in frames:
        if fm.frame is CoordinateFrame.CARTESIAN and fm.path_failure is not None:
            m_f = fm.path_failure.means
            break
    else:
        m_f = np.mean([d.trajectory.points for d in aligned.failures], axis=0)
    chord = np.linspace(m_f[0], m_f[-1], length)
    return 2.0 * chord - m_f


def reproduce(demos: DemonstrationSet, constraints: ConstraintSet,
              config: SolverConfig | None = None) -> Reproduction:
    """Full pipeline: align, fit per frame, assemble, optimize."""
    config = config if config is not None else SolverConfig()
    if demos.size == 0:
        raise InsufficientDataError("at least one demonstration is required")
    dim = demos.dim
    cdim = constraints.dim()
    if cdim is not None and cdim != dim:
        raise ConstraintError(
            f"constraint dimension {cdim} does not match demonstrations ({dim})"
        )
    T = config.resample_len
    constraints.check_range(T)
    aligned = align_set(demos, T)
    bbox = aligned.bounding_box_diagonal()
    if bbox <= 0:
        bbox = 1.0
    state = np.random.SeedSequence(config.seed).generate_state(8)

    frames: list[FrameModel] = []
    repulsion = None
    if aligned.successes:
        for frame, weight in config.weights.active():
            s_trajs = [to_frame(d.trajectory, frame) for d in aligned.successes]
            model_s, path_s = _fit_subset(s_trajs, frame, 0, config, state, T)
            model_f = path_f = w_sim = None
            if aligned.failures:
                f_trajs = [to_frame(d.trajectory, frame) for d in aligned.failures]
                model_f, path_f = _fit_subset(f_trajs, frame, 1, config, state, T)
                w_sim = dissimilarity_weights(path_s.means, path_f.means)
            frames.append(FrameModel(frame=frame, weight=weight,
                                     path_success=path_s, path_failure=path_f,
                                     w_sim=w_sim, model_success=model_s,
                                     model_failure=model_f))
    else:
        # no successes: bounded repulsion from the failed evidence stands
        # in for the (unbounded) negative quadratic
        f_trajs = [d.trajectory for d in aligned.failures]
        model_f, path_f = _fit_subset(f_trajs, CoordinateFrame.CARTESIAN, 1,
                                      config, state, T)
        repulsion = GaussianRepulsion.from_failed_path(
            path_f, sigma_floor=config.repulsion_sigma_floor * bbox,
            gain=config.repulsion_gain,
        )
        weight = config.weights.cartesian if config.weights.cartesian > 0 else 1.0
        frames.append(FrameModel(frame=CoordinateFrame.CARTESIAN, weight=weight,
                                 path_success=None, path_failure=path_f,
                                 w_sim=None, model_failure=model_f))

    x0 = _initial_guess(aligned, frames, constraints, T, dim)
    if repulsion is not None and config.init_jitter_rel > 0:
        rng = np.random.default_rng(int(state[6]))
        direction = rng.standard_normal(dim)
        norm = float(np.linalg.norm(direction))
        if norm > 0:
            direction /= norm
        bump = np.sin(np.pi * np.linspace(0.0, 1.0, T))
        x0 = x0 + config.init_jitter_rel * bbox * bump[:, None] * direction

    problem = assemble(frames, constraints, T, dim, config.lam, config.gamma,
                       repulsion)
    traj, report = solve(problem, x0, config)

    success = 0.0
    failure = 0.0
    for fm in frames:
        y = to_frame(traj, fm.frame)
        if fm.path_success is not None:
            success += fm.weight * quad_cost(y, fm.path_success)
        if fm.path_failure is not None and fm.w_sim is not None:
            failure += config.gamma * fm.weight * weighted_failure_quad(
                y, fm.path_failure, fm.w_sim)
    if repulsion is not None:
        rep_val, _ = repulsion.value_grad(traj.points)
        failure -= rep_val
    elastic = elastic_energy(traj, config.lam)
    pen = penalty(traj, constraints)
    cost = CostBreakdown(
        success_term=success,
        failure_term=failure,
        elastic_term=elastic,
        penalty_term=pen,
        total=success - failure + elastic + pen,
    )
    return Reproduction(trajectory=traj, cost=cost, report=report,
                        frames=tuple(frames), config=config)


@dataclass(frozen=True)
class RefinementStep:
    attempt: Reproduction
    label: Label


@dataclass(frozen=True)
class RefinementResult:
    steps: tuple[RefinementStep, ...]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> Reproduction:
        return self.steps[-1].attempt


def refine(demos: DemonstrationSet, constraints: ConstraintSet,
           labeler: Callable[[Reproduction], "Label | str"],
           config: SolverConfig | None = None,
           max_iters: int = 10) -> RefinementResult:
    """Reproduce, label, and feed failures back until one succeeds.

    The original demonstrations are never modified; each failed attempt
    joins the working set as a new failure demonstration.
    """
    if max_iters < 1:
        raise SolveError("max_iters must be >= 1")
    working = demos
    steps: list[RefinementStep] = []
    for k in range(max_iters):
        rep = reproduce(working, constraints, config)
        label = Label.parse(labeler(rep))
        steps.append(RefinementStep(attempt=rep, label=label))
        if label is Label.SUCCESSFUL:
            return RefinementResult(steps=tuple(steps), converged=True)
        working = working.with_failure(Demonstration(
            id=f"refined-{k + 1}", trajectory=rep.trajectory, label=Label.FAILED,
        ))
    return RefinementResult(steps=tuple(steps), converged=False)
