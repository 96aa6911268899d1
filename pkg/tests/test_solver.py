import numpy as np
import pytest

from skillrepro.costs import (
    ConstraintSet,
    GaussianRepulsion,
    dissimilarity_weights,
    elastic_energy,
    penalty,
    quad_cost,
    weighted_failure_quad,
)
from skillrepro.errors import (
    ConstraintError,
    InsufficientDataError,
    SolveError,
    TrajectoryError,
)
from skillrepro.mixture import RegressedPath
from skillrepro.solver import (
    FrameModel,
    MultiCoordWeights,
    QuadraticProblem,
    SolveStatus,
    SolverConfig,
    _trust_box,
    assemble,
    refine,
    reproduce,
    solve,
)
from skillrepro.trajectory import (
    CoordinateFrame,
    DemonstrationSet,
    Label,
    Trajectory,
    to_frame,
)
from tests.conftest import demo_set

ALL_FRAMES = (
    CoordinateFrame.CARTESIAN,
    CoordinateFrame.TANGENT,
    CoordinateFrame.LAPLACIAN,
)


def spd_path(rng, T, n):
    means = rng.normal(size=(T, n))
    covs = np.zeros((T, n, n))
    for t in range(T):
        M = rng.normal(size=(n, n)) * 0.3
        covs[t] = M @ M.T + 0.4 * np.eye(n)
    return RegressedPath(means=means, covariances=covs,
                         time=np.linspace(0, 1, T),
                         extrapolated=np.zeros(T, dtype=bool))


def full_problem(rng, T=11, n=2, lam=0.7, gamma=1.3, rho=0.3):
    """All three frames, success and failure evidence, pins at both ends."""
    frames = []
    for fr, w in zip(ALL_FRAMES, (1.0, 0.6, 2.0)):
        ps = spd_path(rng, T, n)
        pf = spd_path(rng, T, n)
        frames.append(FrameModel(frame=fr, weight=w, path_success=ps,
                                 path_failure=pf,
                                 w_sim=dissimilarity_weights(ps.means, pf.means)))
    cs = ConstraintSet.from_pairs(
        [(0, rng.normal(size=n)), (T - 1, rng.normal(size=n))], rho=rho)
    return assemble(frames, cs, T, n, lam=lam, gamma=gamma), frames, cs


def spd_problem(rng, T=11, n=2, lam=0.5, rho=0.2):
    """Success-only evidence; the assembled Hessian is positive definite."""
    frames = [FrameModel(frame=fr, weight=w, path_success=spd_path(rng, T, n),
                         path_failure=None, w_sim=None)
              for fr, w in zip(ALL_FRAMES, (1.0, 0.4, 0.8))]
    cs = ConstraintSet.from_pairs([(0, np.zeros(n))], rho=rho)
    return assemble(frames, cs, T, n, lam=lam, gamma=1.0)


class TestMultiCoordWeights:
    def test_rejects_negative_and_all_zero(self):
        with pytest.raises(SolveError):
            MultiCoordWeights(cartesian=-1.0)
        with pytest.raises(SolveError):
            MultiCoordWeights(cartesian=0.0, tangent=0.0, laplacian=0.0)

    def test_active_drops_zero_weights(self):
        w = MultiCoordWeights(cartesian=1.0, tangent=0.0, laplacian=2.5)
        assert w.active() == ((CoordinateFrame.CARTESIAN, 1.0),
                              (CoordinateFrame.LAPLACIAN, 2.5))
        assert w.as_tuple() == (1.0, 0.0, 2.5)


class TestSolverConfig:
    @pytest.mark.parametrize("kw", [
        {"resample_len": 1},
        {"lam": -0.1},
        {"rho": 0.0},
        {"gamma": -1.0},
        {"seed": -1},
        {"max_solver_iters": 0},
        {"grad_tol": 0.0},
        {"trust_factor": 0.0},
        {"repulsion_sigma_floor": 0.0},
        {"repulsion_gain": 0.0},
        {"init_jitter_rel": -0.5},
    ])
    def test_rejects_bad_settings(self, kw):
        with pytest.raises(SolveError):
            SolverConfig(**kw)

    def test_fit_config_carries_em_settings(self):
        cfg = SolverConfig(k_range=(2, 4), restarts=3, max_em_iters=77,
                           em_tol=1e-5, cov_floor_rel=1e-4)
        fc = cfg.fit_config(seed=99)
        assert fc.k_range == (2, 4)
        assert fc.restarts == 3
        assert fc.max_em_iters == 77
        assert fc.tol == 1e-5
        assert fc.cov_floor_rel == 1e-4
        assert fc.seed == 99


class TestAssemble:
    def test_bandwidth_follows_frames_and_elastic(self, rng):
        T, n = 8, 2
        cart = [FrameModel(frame=CoordinateFrame.CARTESIAN, weight=1.0,
                           path_success=spd_path(rng, T, n),
                           path_failure=None, w_sim=None)]
        empty = ConstraintSet(())
        assert assemble(cart, empty, T, n, lam=0.0, gamma=1.0).block_bandwidth == 0
        assert assemble(cart, empty, T, n, lam=0.1, gamma=1.0).block_bandwidth == 1
        tang = [FrameModel(frame=CoordinateFrame.TANGENT, weight=1.0,
                           path_success=spd_path(rng, T, n),
                           path_failure=None, w_sim=None)]
        assert assemble(tang, empty, T, n, lam=0.0, gamma=1.0).block_bandwidth == 1
        lapl = [FrameModel(frame=CoordinateFrame.LAPLACIAN, weight=1.0,
                           path_success=spd_path(rng, T, n),
                           path_failure=None, w_sim=None)]
        assert assemble(lapl, empty, T, n, lam=0.0, gamma=1.0).block_bandwidth == 2

    def test_dense_is_symmetric_and_matches_hess_apply(self, rng):
        prob, _, _ = full_problem(rng)
        H = prob.dense_matrix()
        assert np.allclose(H, H.T, atol=1e-12)
        x = rng.normal(size=(prob.length, prob.dim))
        assert np.allclose(prob.hess_apply(x).ravel(), H @ x.ravel(),
                           rtol=1e-12, atol=1e-12)

    def test_banded_storage_matches_dense(self, rng):
        prob, _, _ = full_problem(rng)
        H = prob.dense_matrix()
        ab = prob.to_scalar_banded()
        N = H.shape[0]
        lower = np.zeros_like(H)
        for r in range(ab.shape[0]):
            for j in range(N - r):
                lower[j + r, j] = ab[r, j]
        rebuilt = lower + np.tril(lower, -1).T
        assert np.allclose(rebuilt, H, rtol=1e-12, atol=1e-12)

    def test_value_reproduces_cost_terms(self, rng):
        # the assembled quadratic must agree with the cost functions it
        # scalarizes, at an arbitrary trajectory
        lam, gamma = 0.7, 1.3
        prob, frames, cs = full_problem(rng, lam=lam, gamma=gamma)
        X = Trajectory(rng.normal(size=(prob.length, prob.dim)))
        expected = elastic_energy(X, lam) + penalty(X, cs)
        for fm in frames:
            y = to_frame(X, fm.frame)
            expected += fm.weight * quad_cost(y, fm.path_success)
            expected -= gamma * fm.weight * weighted_failure_quad(
                y, fm.path_failure, fm.w_sim)
        assert np.isclose(prob.value(X.points), expected, rtol=1e-9, atol=1e-9)

    def test_quad_value_matches_dense_expansion(self, rng):
        prob, _, _ = full_problem(rng)
        H = prob.dense_matrix()
        x = rng.normal(size=(prob.length, prob.dim))
        flat = x.ravel()
        direct = 0.5 * flat @ H @ flat + prob.linear.ravel() @ flat + prob.constant
        assert np.isclose(prob.quad_value(x), direct, rtol=1e-12)

    def test_grad_matches_value_differences(self, rng):
        prob, _, _ = full_problem(rng)
        rep = GaussianRepulsion(centers=rng.normal(size=(prob.length, prob.dim)),
                                sigmas=np.full(prob.length, 0.5), gain=2.0)
        prob = QuadraticProblem(diags=prob.diags, linear=prob.linear,
                                constant=prob.constant,
                                constraints=prob.constraints, repulsion=rep)
        x = rng.normal(size=(prob.length, prob.dim))
        g = prob.grad(x)
        eps = 1e-6
        for _ in range(6):
            t = rng.integers(prob.length)
            j = rng.integers(prob.dim)
            p, m = x.copy(), x.copy()
            p[t, j] += eps
            m[t, j] -= eps
            fd = (prob.value(p) - prob.value(m)) / (2 * eps)
            assert np.isclose(g[t, j], fd, rtol=1e-5, atol=1e-7)

    def test_mismatched_path_shape_rejected(self, rng):
        fm = FrameModel(frame=CoordinateFrame.CARTESIAN, weight=1.0,
                        path_success=spd_path(rng, 9, 2),
                        path_failure=None, w_sim=None)
        with pytest.raises(TrajectoryError):
            assemble([fm], ConstraintSet(()), 10, 2, lam=0.0, gamma=1.0)

    def test_mismatched_repulsion_rejected(self, rng):
        fm = FrameModel(frame=CoordinateFrame.CARTESIAN, weight=1.0,
                        path_success=spd_path(rng, 8, 2),
                        path_failure=None, w_sim=None)
        rep = GaussianRepulsion(centers=np.zeros((5, 2)), sigmas=np.ones(5))
        with pytest.raises(TrajectoryError):
            assemble([fm], ConstraintSet(()), 8, 2, lam=0.0, gamma=1.0,
                     repulsion=rep)

    def test_constraint_outside_horizon_rejected(self, rng):
        fm = FrameModel(frame=CoordinateFrame.CARTESIAN, weight=1.0,
                        path_success=spd_path(rng, 8, 2),
                        path_failure=None, w_sim=None)
        cs = ConstraintSet.from_pairs([(8, (0.0, 0.0))])
        with pytest.raises(ConstraintError):
            assemble([fm], cs, 8, 2, lam=0.0, gamma=1.0)


class TestTrustBox:
    def test_spans_start_and_constraint_targets(self):
        T, n = 4, 2
        diags = np.tile(np.eye(n), (1, T, 1, 1))
        cs = ConstraintSet.from_pairs([(0, (-1.0, 0.0)), (3, (2.0, 5.0))])
        prob = QuadraticProblem(diags=diags, linear=np.zeros((T, n)),
                                constant=0.0, constraints=cs)
        x0 = np.zeros((T, n))
        lo, hi = _trust_box(prob, x0, SolverConfig(trust_factor=2.0))
        diag = np.linalg.norm([3.0, 5.0])
        assert np.allclose(lo, np.array([-1.0, 0.0]) - 2.0 * diag)
        assert np.allclose(hi, np.array([2.0, 5.0]) + 2.0 * diag)


class TestSolvePaths:
    def test_direct_solve_matches_dense_solution(self, rng):
        prob = spd_problem(rng)
        x0 = rng.normal(size=(prob.length, prob.dim))
        traj, report = solve(prob, x0, SolverConfig())
        assert report.status is SolveStatus.DIRECT
        assert report.iterations == 0
        H = prob.dense_matrix()
        expect = np.linalg.solve(H, -prob.linear.ravel())
        assert np.allclose(traj.points.ravel(), expect, rtol=1e-9, atol=1e-9)
        assert report.gradient_norm < 1e-6 * (1 + np.max(np.abs(prob.linear)))
        assert report.final_cost <= report.initial_cost + 1e-12

    def test_repulsion_takes_iterative_path(self, rng):
        prob = spd_problem(rng)
        # repulsion far outside the data region: the minimizer is
        # unchanged but the solve must go through descent
        rep = GaussianRepulsion(centers=np.full((prob.length, prob.dim), 80.0),
                                sigmas=np.full(prob.length, 0.3), gain=1.0)
        prob_r = QuadraticProblem(diags=prob.diags, linear=prob.linear,
                                  constant=prob.constant,
                                  constraints=prob.constraints, repulsion=rep)
        x0 = rng.normal(size=(prob.length, prob.dim))
        traj, report = solve(prob_r, x0, SolverConfig())
        assert report.status is SolveStatus.ITERATIVE_CONVERGED
        assert report.iterations >= 1
        H = prob.dense_matrix()
        expect = np.linalg.solve(H, -prob.linear.ravel())
        assert np.allclose(traj.points.ravel(), expect, atol=1e-4)

    def test_iteration_budget_reported(self, rng):
        prob = spd_problem(rng)
        H = prob.dense_matrix()
        star = np.linalg.solve(H, -prob.linear.ravel()).reshape(prob.length,
                                                                prob.dim)
        # a sharp bump sitting on the quadratic minimizer forces a real
        # negotiation between the two terms; one iteration cannot finish
        rep = GaussianRepulsion(centers=star, sigmas=np.full(prob.length, 0.05),
                                gain=50.0)
        prob_r = QuadraticProblem(diags=prob.diags, linear=prob.linear,
                                  constant=prob.constant,
                                  constraints=prob.constraints, repulsion=rep)
        x0 = star + 0.3
        _, report = solve(prob_r, x0, SolverConfig(max_solver_iters=1,
                                                   grad_tol=1e-12))
        assert report.status is SolveStatus.ITERATIVE_MAX_ITERS
        assert report.iterations == 1

    def test_indefinite_hessian_falls_back(self):
        T, n = 6, 2
        diags = np.zeros((1, T, n, n))
        diags[0] = -np.eye(n)
        prob = QuadraticProblem(diags=diags, linear=np.zeros((T, n)),
                                constant=0.0, constraints=ConstraintSet(()))
        x0 = np.full((T, n), 0.1)
        traj, report = solve(prob, x0, SolverConfig())
        assert report.status is SolveStatus.INDEFINITE_FALLBACK
        assert np.all(np.isfinite(traj.points))

    def test_wrong_start_shape_rejected(self, rng):
        prob = spd_problem(rng)
        with pytest.raises(SolveError):
            solve(prob, np.zeros((prob.length + 1, prob.dim)), SolverConfig())

    def test_report_round_trips_to_dict(self, rng):
        prob = spd_problem(rng)
        _, report = solve(prob, np.zeros((prob.length, prob.dim)), SolverConfig())
        d = report.as_dict()
        assert d["status"] == "DirectSolve"
        assert d["iterations"] == 0
        assert set(d) == {"status", "iterations", "initial_cost", "final_cost",
                          "gradient_norm", "constraint_residual", "backend"}


def small_config(**kw):
    base = dict(resample_len=40, k_range=(1, 1), restarts=2, max_em_iters=60,
                seed=3)
    base.update(kw)
    return SolverConfig(**base)


class TestReproduce:
    def test_tracks_a_tight_bundle(self, rng):
        demos = demo_set(rng, n_success=4, length=40)
        rep = reproduce(demos, ConstraintSet(()), small_config())
        assert rep.report.status is SolveStatus.DIRECT
        means = rep.frames[0].path_success.means
        assert np.max(np.abs(rep.trajectory.points - means)) < 2e-2
        assert rep.cost.failure_term == 0.0

    def test_deterministic_for_fixed_seed(self, rng):
        demos = demo_set(rng, n_success=3, length=40)
        cfg = small_config()
        a = reproduce(demos, ConstraintSet(()), cfg)
        b = reproduce(demos, ConstraintSet(()), cfg)
        assert np.array_equal(a.trajectory.points, b.trajectory.points)
        assert a.report.as_dict() == b.report.as_dict()
        assert a.cost.total == b.cost.total

    def test_constraints_are_honored(self, rng):
        demos = demo_set(rng, n_success=3, length=40)
        target = demos.successes[0].trajectory.points[0] + 0.3
        cs = ConstraintSet.from_pairs([(0, target)], rho=1e-7)
        rep = reproduce(demos, cs, small_config())
        assert rep.report.constraint_residual < 1e-4
        assert np.allclose(rep.trajectory.points[0], target, atol=1e-4)

    def test_gamma_zero_ignores_failures(self, rng):
        demos = demo_set(rng, n_success=3, n_fail=2, length=40)
        rep = reproduce(demos, ConstraintSet(()), small_config(gamma=0.0))
        assert rep.cost.failure_term == 0.0
        assert rep.frames[0].path_failure is not None

    def test_failure_only_repels_from_evidence(self, rng):
        demos = demo_set(rng, n_success=0, n_fail=2, length=40)
        rep = reproduce(demos, ConstraintSet(()), small_config())
        assert rep.report.status in (SolveStatus.ITERATIVE_CONVERGED,
                                     SolveStatus.ITERATIVE_MAX_ITERS)
        assert rep.frames[0].path_success is None
        assert rep.cost.failure_term <= 0.0
        gaps = np.linalg.norm(
            rep.trajectory.points - rep.frames[0].path_failure.means, axis=1)
        assert np.mean(gaps) > 0.02

    def test_empty_set_rejected(self):
        with pytest.raises(InsufficientDataError):
            reproduce(DemonstrationSet((), ()), ConstraintSet(()), small_config())

    def test_constraint_dimension_mismatch_rejected(self, rng):
        demos = demo_set(rng, n_success=2, length=40)
        cs = ConstraintSet.from_pairs([(0, (0.0, 0.0, 0.0))])
        with pytest.raises(ConstraintError):
            reproduce(demos, cs, small_config())

    def test_constraint_beyond_horizon_rejected(self, rng):
        demos = demo_set(rng, n_success=2, length=40)
        cs = ConstraintSet.from_pairs([(40, (0.0, 0.0))])
        with pytest.raises(ConstraintError):
            reproduce(demos, cs, small_config())

    def test_cost_breakdown_reconciles(self, rng):
        demos = demo_set(rng, n_success=3, n_fail=1, length=40)
        rep = reproduce(demos, ConstraintSet(()), small_config())
        c = rep.cost
        assert np.isclose(c.total,
                          c.success_term - c.failure_term
                          + c.elastic_term + c.penalty_term, rtol=1e-9)


class TestRefine:
    def test_feeds_failures_back_until_success(self, rng):
        demos = demo_set(rng, n_success=3, length=40)
        seen = []

        def labeler(rep):
            seen.append(rep)
            return "s" if len(seen) >= 2 else "failed"

        result = refine(demos, ConstraintSet(()), labeler, small_config(),
                        max_iters=5)
        assert result.converged
        assert result.iterations == 2
        assert result.steps[0].label is Label.FAILED
        assert result.steps[1].label is Label.SUCCESSFUL
        assert result.final is result.steps[-1].attempt
        # the second attempt saw the first one as failure evidence
        assert result.steps[0].attempt.frames[0].path_failure is None
        assert result.steps[1].attempt.frames[0].path_failure is not None
        assert demos.size == 3

    def test_reports_non_convergence(self, rng):
        demos = demo_set(rng, n_success=3, length=40)
        result = refine(demos, ConstraintSet(()), lambda rep: "f",
                        small_config(), max_iters=2)
        assert not result.converged
        assert result.iterations == 2
        assert all(s.label is Label.FAILED for s in result.steps)

    def test_rejects_zero_budget(self, rng):
        demos = demo_set(rng, n_success=2, length=40)
        with pytest.raises(SolveError):
            refine(demos, ConstraintSet(()), lambda rep: "s", small_config(),
                   max_iters=0)
