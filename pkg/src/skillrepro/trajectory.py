"""Trajectory data model, temporal alignment, and differential coordinates.

A trajectory is an ordered, fixed-length sequence of n-dimensional
task-space points. Time is implicit: sample i sits at normalized time
i / (T - 1) on [0, 1]. Demonstrations attach a success/failure label to
a trajectory; a demonstration set is the labeled pair of subsets.

The Tangent and Laplacian coordinate transforms are first and half
second differences with asymmetric boundary rows; they are applied as
stencils rather than materialized T x T matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import TrajectoryError


class Label(Enum):
    SUCCESSFUL = "success"
    FAILED = "failure"

    @classmethod
    def parse(cls, value: "str | Label") -> "Label":
        if isinstance(value, Label):
            return value
        key = str(value).strip().lower()
        aliases = {
            "success": cls.SUCCESSFUL,
            "successful": cls.SUCCESSFUL,
            "s": cls.SUCCESSFUL,
            "failure": cls.FAILED,
            "failed": cls.FAILED,
            "fail": cls.FAILED,
            "f": cls.FAILED,
        }
        if key not in aliases:
            raise TrajectoryError(f"unknown label {value!r}")
        return aliases[key]


class CoordinateFrame(Enum):
    CARTESIAN = "cartesian"
    TANGENT = "tangent"
    LAPLACIAN = "laplacian"


@dataclass(frozen=True)
class Trajectory:
    """Immutable (T, n) array of task-space samples."""

    points: np.ndarray

    def __post_init__(self):
        arr = np.array(self.points, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise TrajectoryError(f"points must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise TrajectoryError("a trajectory needs at least 2 samples")
        if arr.shape[1] < 1:
            raise TrajectoryError("a trajectory needs at least 1 dimension")
        if not np.all(np.isfinite(arr)):
            raise TrajectoryError("trajectory contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def length(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.length)

    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def bounding_box_diagonal(self) -> float:
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.linalg.norm(span))


@dataclass(frozen=True)
class Demonstration:
    id: str
    trajectory: Trajectory
    label: Label

    def __post_init__(self):
        if not self.id:
            raise TrajectoryError("demonstration id must be nonempty")


@dataclass(frozen=True)
class DemonstrationSet:
    """Labeled pair of success/failure demonstration lists."""

    successes: tuple[Demonstration, ...] = ()
    failures: tuple[Demonstration, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "successes", tuple(self.successes))
        object.__setattr__(self, "failures", tuple(self.failures))
        ids = [d.id for d in self.successes + self.failures]
        if len(set(ids)) != len(ids):
            raise TrajectoryError("demonstration ids must be unique")
        dims = {d.trajectory.dim for d in self.successes + self.failures}
        if len(dims) > 1:
            raise TrajectoryError(f"mixed trajectory dimensions: {sorted(dims)}")

    @property
    def size(self) -> int:
        return len(self.successes) + len(self.failures)

    @property
    def dim(self) -> int:
        if self.size == 0:
            raise TrajectoryError("empty demonstration set has no dimension")
        return (self.successes + self.failures)[0].trajectory.dim

    def all_demos(self) -> tuple[Demonstration, ...]:
        return self.successes + self.failures

    def with_failure(self, demo: Demonstration) -> "DemonstrationSet":
        if demo.label is not Label.FAILED:
            raise TrajectoryError("with_failure expects a failure-labeled demo")
        return DemonstrationSet(self.successes, self.failures + (demo,))

    def bounding_box_diagonal(self) -> float:
        pts = np.vstack([d.trajectory.points for d in self.all_demos()])
        span = pts.max(axis=0) - pts.min(axis=0)
        return float(np.linalg.norm(span))


def resample(traj: Trajectory, target_len: int) -> Trajectory:
    """Piecewise-linear resampling at uniform parameter values.

    Endpoints are preserved exactly; target_len == T returns an equal
    trajectory (interpolation at the original nodes).
    """
    if target_len < 2:
        raise TrajectoryError(f"target_len must be >= 2, got {target_len}")
    src = np.linspace(0.0, 1.0, traj.length)
    dst = np.linspace(0.0, 1.0, target_len)
    out = np.empty((target_len, traj.dim))
    for j in range(traj.dim):
        out[:, j] = np.interp(dst, src, traj.points[:, j])
    out[0] = traj.points[0]
    out[-1] = traj.points[-1]
    return Trajectory(out)


def align_set(dset: DemonstrationSet, target_len: int) -> DemonstrationSet:
    """Resample every member trajectory to a shared length."""
    if dset.size == 0:
        raise TrajectoryError("cannot align an empty demonstration set")

    def _aligned(demo: Demonstration) -> Demonstration:
        return replace(demo, trajectory=resample(demo.trajectory, target_len))

    return DemonstrationSet(
        tuple(_aligned(d) for d in dset.successes),
        tuple(_aligned(d) for d in dset.failures),
    )


def smooth(traj: Trajectory, window: int = 5) -> Trajectory:
    """Centered moving average with shrinking windows at the boundaries.

    The half-width shrinks near the ends so the window always stays
    centered and inside the trajectory; endpoints pass through unchanged.
    """
    if window % 2 == 0 or window < 1:
        raise TrajectoryError(f"window must be odd and positive, got {window}")
    T = traj.length
    if window > T:
        raise TrajectoryError(f"window {window} exceeds trajectory length {T}")
    half = (window - 1) // 2
    pts = traj.points
    out = np.empty_like(pts)
    for i in range(T):
        h = min(half, i, T - 1 - i)
        out[i] = pts[i - h : i + h + 1].mean(axis=0)
    return Trajectory(out)


def frame_row_support(frame: CoordinateFrame, length: int):
    """Stencil of each transform row as ((index, coeff), ...) tuples.

    Single source of truth for the Tangent and Laplacian matrices; used
    both by to_frame and by the quadratic assembly.
    """
    T = length
    if frame is CoordinateFrame.CARTESIAN:
        return [((t, 1.0),) for t in range(T)]
    if frame is CoordinateFrame.TANGENT:
        if T < 2:
            raise TrajectoryError("tangent frame needs T >= 2")
        rows = [((t, -1.0), (t + 1, 1.0)) for t in range(T - 1)]
        rows.append(((T - 1, -1.0),))
        return rows
    if frame is CoordinateFrame.LAPLACIAN:
        if T < 3:
            raise TrajectoryError("laplacian frame needs T >= 3")
        rows = [((0, 1.0), (1, -1.0))]
        rows.extend(
            ((t - 1, -0.5), (t, 1.0), (t + 1, -0.5)) for t in range(1, T - 1)
        )
        rows.append(((T - 2, -1.0), (T - 1, 1.0)))
        return rows
    raise TrajectoryError(f"unknown frame {frame!r}")


def to_frame(traj: Trajectory, frame: CoordinateFrame) -> Trajectory:
    """Apply a differential coordinate transform column by column."""
    if frame is CoordinateFrame.CARTESIAN:
        return traj
    pts = traj.points
    T = traj.length
    out = np.empty_like(pts)
    if frame is CoordinateFrame.TANGENT:
        if T < 2:
            raise TrajectoryError("tangent frame needs T >= 2")
        out[:-1] = pts[1:] - pts[:-1]
        out[-1] = -pts[-1]
    elif frame is CoordinateFrame.LAPLACIAN:
        if T < 3:
            raise TrajectoryError("laplacian frame needs T >= 3")
        out[0] = pts[0] - pts[1]
        out[1:-1] = pts[1:-1] - 0.5 * (pts[:-2] + pts[2:])
        out[-1] = pts[-1] - pts[-2]
    else:
        raise TrajectoryError(f"unknown frame {frame!r}")
    return Trajectory(out)
