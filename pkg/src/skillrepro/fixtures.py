"""Synthetic demonstration scenarios.

Deterministic generators for the committed test fixtures: planar
reaching bundles around an obstacle, a failure-only seed demo for the
refinement loop, line bundles for model-order selection, and a curved
skill for the differential-coordinate comparison. Obstacles are pure
metadata for labeling in tests and the UI; the solver never sees them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import ConstraintSet
from .errors import TrajectoryError
from .solver import MultiCoordWeights, Reproduction, SolverConfig
from .trajectory import Demonstration, DemonstrationSet, Label, Trajectory


@dataclass(frozen=True)
class Obstacle:
    """Disk obstacle used by automatic collision labelers."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        if self.radius <= 0:
            raise TrajectoryError(f"radius must be positive, got {self.radius}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    def clearance(self, traj: Trajectory) -> float:
        """Smallest distance from any trajectory point to the center."""
        d = np.linalg.norm(traj.points - self.center, axis=1)
        return float(d.min())

    def collides(self, traj: Trajectory) -> bool:
        return self.clearance(traj) <= self.radius


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    description: str
    demos: DemonstrationSet
    constraints: ConstraintSet
    config: SolverConfig
    obstacle: Obstacle | None = None


def collision_labeler(obstacle: Obstacle):
    """Labeler for the refinement loop: fail anything touching the disk."""

    def label(rep: Reproduction) -> Label:
        return Label.FAILED if obstacle.collides(rep.trajectory) else Label.SUCCESSFUL

    return label


def _smooth_noise(rng: np.random.Generator, u: np.ndarray, amp: float,
                  modes=(2, 3, 4)) -> np.ndarray:
    # low-order sine modes: endpoint-preserving, visually hand-drawn
    y = np.zeros_like(u)
    for k in modes:
        y += rng.normal(0.0, amp / k) * np.sin(k * np.pi * u)
    return y


def _arc(rng: np.random.Generator, height: float, amp: float, T: int,
         white: float = 0.0, shape_freq: float = 1.0) -> np.ndarray:
    u = np.linspace(0.0, 1.0, T)
    y = height * np.sin(shape_freq * np.pi * u) + _smooth_noise(rng, u, amp)
    if white > 0:
        w = rng.normal(0.0, white, T)
        w[0] = w[-1] = 0.0  # endpoints stay shared across the bundle
        y = y + w
    return np.column_stack([u, y])


def _demo(idx: int, pts: np.ndarray, label: Label) -> Demonstration:
    prefix = "s" if label is Label.SUCCESSFUL else "f"
    return Demonstration(id=f"{prefix}{idx}", trajectory=Trajectory(pts), label=label)


def build_reaching_obstacle(seed: int = 7) -> Scenario:
    """Planar reach with successes clearing and failures crowding a disk."""
    rng = np.random.default_rng(seed)
    T = 80
    succ = [_demo(i + 1, _arc(rng, h, 0.012, T), Label.SUCCESSFUL)
            for i, h in enumerate((0.10, -0.06, 0.02))]
    fail = [_demo(i + 1, _arc(rng, h, 0.012, T), Label.FAILED)
            for i, h in enumerate((0.03, -0.15))]
    constraints = ConstraintSet.from_pairs(
        [(0, (0.0, 0.0)), (99, (1.0, 0.0))], rho=1e-6)
    config = SolverConfig(resample_len=100, lam=0.01, rho=1e-6, k_range=(1, 1),
                          seed=seed)
    return Scenario(
        name="reaching-obstacle",
        seed=seed,
        description="Three successful reaches around a disk at (0.5, 0) plus "
                    "two failures crowding it; endpoint constraints.",
        demos=DemonstrationSet(tuple(succ), tuple(fail)),
        constraints=constraints,
        config=config,
        obstacle=Obstacle(center=np.array([0.5, 0.0]), radius=0.05),
    )


def build_iterate_obstacle(seed: int = 3) -> Scenario:
    """Single failed demo straight through the disk; refinement seed."""
    rng = np.random.default_rng(seed)
    fail = [_demo(1, _arc(rng, 0.02, 0.008, 80), Label.FAILED)]
    constraints = ConstraintSet.from_pairs(
        [(0, (0.0, 0.0)), (99, (1.0, 0.0))], rho=1e-6)
    # narrow repulsion makes the first push land short of clearing the disk,
    # so the loop has to bank at least one labeled failure
    config = SolverConfig(resample_len=100, lam=0.01, rho=1e-6, k_range=(1, 1),
                          seed=seed, repulsion_sigma_floor=0.03)
    return Scenario(
        name="iterate-obstacle",
        seed=seed,
        description="One failed demonstration through the disk at (0.5, 0); "
                    "the refinement loop must discover a clearing path.",
        demos=DemonstrationSet((), tuple(fail)),
        constraints=constraints,
        config=config,
        obstacle=Obstacle(center=np.array([0.5, 0.0]), radius=0.05),
    )


def build_empty_set(seed: int = 2) -> Scenario:
    """Small bundle exercised with successes only, failures only, or both."""
    rng = np.random.default_rng(seed)
    T = 60
    succ = [_demo(i + 1, _arc(rng, h, 0.01, T), Label.SUCCESSFUL)
            for i, h in enumerate((0.08, 0.12))]
    fail = [_demo(i + 1, _arc(rng, h, 0.01, T), Label.FAILED)
            for i, h in enumerate((-0.06, -0.14))]
    constraints = ConstraintSet.from_pairs(
        [(0, (0.0, 0.0)), (99, (1.0, 0.0))], rho=1e-6)
    config = SolverConfig(resample_len=100, lam=0.01, rho=1e-6, k_range=(1, 1),
                          seed=seed)
    return Scenario(
        name="empty-set",
        seed=seed,
        description="Arcs above and below the start-goal line; reproductions "
                    "must stay well-posed when either label subset is empty.",
        demos=DemonstrationSet(tuple(succ), tuple(fail)),
        constraints=constraints,
        config=config,
    )


def build_bimodal_lines(seed: int = 11) -> Scenario:
    """Two parallel 1-D line bundles; model-order selection material."""
    rng = np.random.default_rng(seed)
    T = 40
    u = np.linspace(0.0, 1.0, T)
    demos = []
    for i in range(8):
        level = 0.5 if i < 4 else -0.5
        slope = rng.normal(0.0, 0.03)
        # white jitter keeps single demos from being separable components
        y = (level + slope * (u - 0.5) + _smooth_noise(rng, u, 0.008)
             + rng.normal(0.0, 0.015, T))
        demos.append(_demo(i + 1, y[:, None].copy(), Label.SUCCESSFUL))
    config = SolverConfig(resample_len=50, k_range=(1, 6), seed=seed)
    return Scenario(
        name="bimodal-lines",
        seed=seed,
        description="Eight 1-D trajectories in two bundles at +0.5 and -0.5; "
                    "order selection should find two components.",
        demos=DemonstrationSet(tuple(demos), ()),
        constraints=ConstraintSet((), rho=config.rho),
        config=config,
    )


def build_single_bundle(seed: int = 5) -> Scenario:
    """One coherent 1-D bundle along a gentle slope."""
    rng = np.random.default_rng(seed)
    T = 40
    u = np.linspace(0.0, 1.0, T)
    demos = []
    for i in range(4):
        y = 0.3 * u + _smooth_noise(rng, u, 0.008) + rng.normal(0.0, 0.012, T)
        demos.append(_demo(i + 1, y[:, None].copy(), Label.SUCCESSFUL))
    config = SolverConfig(resample_len=50, k_range=(1, 3), seed=seed)
    return Scenario(
        name="single-bundle",
        seed=seed,
        description="Four 1-D trajectories along one slope; a low model "
                    "order should suffice.",
        demos=DemonstrationSet(tuple(demos), ()),
        constraints=ConstraintSet((), rho=config.rho),
        config=config,
    )


def build_curved_skill(seed: int = 13) -> Scenario:
    """S-shaped bundle with displaced endpoint targets.

    Demos are vertical translates of one shape: positional spread keeps the
    point-space pull soft while the second-difference statistics stay tight,
    which is the regime where differential-coordinate weights help.  The
    white-noise floor keeps those difference statistics honest.
    """
    rng = np.random.default_rng(seed)
    succ = []
    for i in range(3):
        pts = _arc(rng, 0.15, 0.004, 80, white=0.002, shape_freq=2.0)
        pts[:, 1] += rng.uniform(-0.08, 0.08)
        succ.append(_demo(i + 1, pts, Label.SUCCESSFUL))
    constraints = ConstraintSet.from_pairs(
        [(0, (0.0, 0.08)), (99, (1.0, -0.05))], rho=1e-6)
    config = SolverConfig(resample_len=100, lam=1e-4, rho=1e-6, k_range=(1, 6),
                          seed=seed, weights=MultiCoordWeights(1.0, 0.0, 0.0))
    return Scenario(
        name="curved-skill",
        seed=seed,
        description="Three S-shaped demonstrations with endpoint targets "
                    "displaced off the bundle; material for comparing "
                    "coordinate weightings.",
        demos=DemonstrationSet(tuple(succ), ()),
        constraints=constraints,
        config=config,
    )


SCENARIO_BUILDERS = {
    "reaching-obstacle": build_reaching_obstacle,
    "iterate-obstacle": build_iterate_obstacle,
    "empty-set": build_empty_set,
    "bimodal-lines": build_bimodal_lines,
    "single-bundle": build_single_bundle,
    "curved-skill": build_curved_skill,
}


def build(name: str, seed: int | None = None) -> Scenario:
    try:
        builder = SCENARIO_BUILDERS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIO_BUILDERS))
        raise TrajectoryError(f"unknown scenario {name!r} (known: {known})") from None
    return builder() if seed is None else builder(seed)
