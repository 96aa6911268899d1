"""File formats and canonical serialization.

One ingestion path (parse, validate, smooth, resample) shared by the
CLI and the HTTP service, so the two produce identical solver inputs
for identical files. All dict builders are deterministic: fixed key
order via sorted dumps, floats via repr.
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .costs import ConstraintSet, CostBreakdown
from .errors import TrajectoryError
from .fixtures import Obstacle, Scenario
from .metrics import MetricReport
from .solver import (
    FrameModel,
    MultiCoordWeights,
    Reproduction,
    SolverConfig,
    SolverReport,
)
from .trajectory import Demonstration, DemonstrationSet, Label, Trajectory, resample, smooth

DEFAULT_SMOOTH_WINDOW = 5


def dumps_canonical(obj) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _as_points(raw, dim=None) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise TrajectoryError("points must be a nonempty list of rows")
    width = None
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or not row:
            raise TrajectoryError(f"row {i} is not a nonempty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise TrajectoryError(
                f"ragged points: row {i} has {len(row)} values, expected {width}"
            )
        try:
            vals = [float(v) for v in row]
        except (TypeError, ValueError):
            raise TrajectoryError(f"row {i} contains a non-numeric value") from None
        if not all(np.isfinite(vals)):
            raise TrajectoryError(f"row {i} contains a non-finite value")
        rows.append(vals)
    if dim is not None and width != dim:
        raise TrajectoryError(f"declared dim {dim} but rows have {width} values")
    return np.asarray(rows, dtype=float)


def parse_trajectory_payload(payload: dict):
    """TrajectoryFile JSON body -> (points, label or None, id or None)."""
    if not isinstance(payload, dict):
        raise TrajectoryError("trajectory payload must be a JSON object")
    pts = _as_points(payload.get("points"), payload.get("dim"))
    label = payload.get("label")
    if label is not None:
        label = Label.parse(label)
    demo_id = payload.get("id")
    if demo_id is not None and not isinstance(demo_id, str):
        raise TrajectoryError("id must be a string")
    return pts, label, demo_id


def _read_csv_points(path: Path) -> np.ndarray:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TrajectoryError(f"{path.name}: empty CSV") from None
        header = [h.strip() for h in header]
        expected = [f"x{i + 1}" for i in range(len(header))]
        if header != expected:
            raise TrajectoryError(
                f"{path.name}: CSV header must be {','.join(expected)}"
            )
        rows = [row for row in reader if row]
    return _as_points([[v for v in row] for row in rows], dim=len(header))


def import_demo(source, label=None, demo_id=None, target_len: int = 100,
                smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> Demonstration:
    """Load, validate, smooth, and resample one demonstration.

    source is a TrajectoryFile payload dict or a path to a .json/.csv
    file. A label must come from the payload or the argument; the
    argument wins when both are present.
    """
    payload_label = payload_id = None
    if isinstance(source, dict):
        pts, payload_label, payload_id = parse_trajectory_payload(source)
    else:
        path = Path(source)
        if not path.exists():
            raise TrajectoryError(f"no such file: {path}")
        if path.suffix.lower() == ".csv":
            pts = _read_csv_points(path)
        else:
            try:
                payload = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise TrajectoryError(f"{path.name}: invalid JSON ({exc})") from None
            pts, payload_label, payload_id = parse_trajectory_payload(payload)
        if payload_id is None:
            payload_id = path.stem
    final_label = Label.parse(label) if label is not None else payload_label
    if final_label is None:
        raise TrajectoryError("demonstration label is required (success/failure)")
    final_id = demo_id or payload_id
    if not final_id:
        raise TrajectoryError("demonstration id is required")
    traj = Trajectory(pts)
    window = min(smooth_window, traj.length)
    if window % 2 == 0:
        window -= 1
    if window >= 3:
        traj = smooth(traj, window)
    traj = resample(traj, target_len)
    return Demonstration(id=final_id, trajectory=traj, label=final_label)


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {"dim": traj.dim, "points": traj.points.tolist()}


def demo_to_dict(demo: Demonstration) -> dict:
    return {
        "id": demo.id,
        "label": demo.label.value,
        "dim": demo.trajectory.dim,
        "points": demo.trajectory.points.tolist(),
    }


def demoset_to_dict(demos: DemonstrationSet) -> dict:
    return {
        "successes": [demo_to_dict(d) for d in demos.successes],
        "failures": [demo_to_dict(d) for d in demos.failures],
    }


def demoset_from_dict(d: dict) -> DemonstrationSet:
    def _one(item: dict) -> Demonstration:
        pts, label, demo_id = parse_trajectory_payload(item)
        if label is None or demo_id is None:
            raise TrajectoryError("stored demonstration needs id and label")
        return Demonstration(id=demo_id, trajectory=Trajectory(pts), label=label)

    return DemonstrationSet(
        tuple(_one(x) for x in d.get("successes", ())),
        tuple(_one(x) for x in d.get("failures", ())),
    )


def constraints_to_dict(cs: ConstraintSet) -> dict:
    return {
        "rho": cs.rho,
        "entries": [{"index": i, "point": p.tolist()} for i, p in cs.entries],
    }


def constraints_from_dict(d: dict) -> ConstraintSet:
    entries = tuple(
        (int(e["index"]), np.asarray(e["point"], dtype=float))
        for e in d.get("entries", ())
    )
    return ConstraintSet(entries, rho=float(d.get("rho", 1e-3)))


def config_to_dict(cfg: SolverConfig) -> dict:
    return {
        "resample_len": cfg.resample_len,
        "lam": cfg.lam,
        "rho": cfg.rho,
        "gamma": cfg.gamma,
        "weights": {
            "cartesian": cfg.weights.cartesian,
            "tangent": cfg.weights.tangent,
            "laplacian": cfg.weights.laplacian,
        },
        "k_range": list(cfg.k_range),
        "seed": cfg.seed,
        "restarts": cfg.restarts,
        "max_em_iters": cfg.max_em_iters,
        "em_tol": cfg.em_tol,
        "cov_floor_rel": cfg.cov_floor_rel,
        "max_solver_iters": cfg.max_solver_iters,
        "grad_tol": cfg.grad_tol,
        "trust_factor": cfg.trust_factor,
        "repulsion_sigma_floor": cfg.repulsion_sigma_floor,
        "repulsion_gain": cfg.repulsion_gain,
        "init_jitter_rel": cfg.init_jitter_rel,
    }


def config_from_dict(d: dict, base: SolverConfig | None = None) -> SolverConfig:
    """Build a config from a (possibly partial) dict over base defaults."""
    cfg = base if base is not None else SolverConfig()
    d = dict(d)
    if "weights" in d:
        w = d.pop("weights")
        d["weights"] = MultiCoordWeights(
            cartesian=float(w.get("cartesian", 1.0)),
            tangent=float(w.get("tangent", 0.0)),
            laplacian=float(w.get("laplacian", 0.0)),
        )
    if "k_range" in d:
        lo, hi = d.pop("k_range")
        d["k_range"] = (int(lo), int(hi))
    known = set(config_to_dict(cfg))
    unknown = set(d) - known
    if unknown:
        raise TrajectoryError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **d)


def breakdown_to_dict(cost: CostBreakdown) -> dict:
    return cost.as_dict()


def report_to_dict(report: SolverReport) -> dict:
    return report.as_dict()


def _frame_to_dict(fm: FrameModel) -> dict:
    out = {
        "frame": fm.frame.value,
        "weight": fm.weight,
        "success_mean": None,
        "success_spread": None,
        "failure_mean": None,
        "failure_spread": None,
        "success_components": None,
        "failure_components": None,
        "w_sim": None,
    }
    # spreads are per-timestep standard deviations (sqrt of the
    # covariance diagonal); clients render them as ribbons
    if fm.path_success is not None:
        out["success_mean"] = fm.path_success.means.tolist()
        diag = np.diagonal(fm.path_success.covariances, axis1=1, axis2=2)
        out["success_spread"] = np.sqrt(diag).tolist()
    if fm.path_failure is not None:
        out["failure_mean"] = fm.path_failure.means.tolist()
        diag = np.diagonal(fm.path_failure.covariances, axis1=1, axis2=2)
        out["failure_spread"] = np.sqrt(diag).tolist()
    if fm.model_success is not None:
        out["success_components"] = fm.model_success.n_components
    if fm.model_failure is not None:
        out["failure_components"] = fm.model_failure.n_components
    if fm.w_sim is not None:
        out["w_sim"] = fm.w_sim.tolist()
    return out


def reproduction_to_dict(rep: Reproduction) -> dict:
    return {
        "trajectory": trajectory_to_dict(rep.trajectory),
        "cost": breakdown_to_dict(rep.cost),
        "report": report_to_dict(rep.report),
        "frames": [_frame_to_dict(fm) for fm in rep.frames],
        "config": config_to_dict(rep.config),
    }


def trajectory_to_csv(traj: Trajectory) -> str:
    header = ",".join(f"x{i + 1}" for i in range(traj.dim))
    lines = [header]
    lines.extend(",".join(repr(v) for v in row) for row in traj.points.tolist())
    return "\n".join(lines) + "\n"


def metric_report_to_dict(report: MetricReport) -> dict:
    return report.as_dict()


def scenario_to_dict(sc: Scenario) -> dict:
    out = {
        "name": sc.name,
        "seed": sc.seed,
        "description": sc.description,
        "demos": demoset_to_dict(sc.demos),
        "constraints": constraints_to_dict(sc.constraints),
        "config": config_to_dict(sc.config),
        "obstacle": None,
    }
    if sc.obstacle is not None:
        out["obstacle"] = {
            "center": sc.obstacle.center.tolist(),
            "radius": sc.obstacle.radius,
        }
    return out


def scenario_from_dict(d: dict) -> Scenario:
    obstacle = None
    if d.get("obstacle") is not None:
        obstacle = Obstacle(
            center=np.asarray(d["obstacle"]["center"], dtype=float),
            radius=float(d["obstacle"]["radius"]),
        )
    return Scenario(
        name=d["name"],
        seed=int(d["seed"]),
        description=d.get("description", ""),
        demos=demoset_from_dict(d["demos"]),
        constraints=constraints_from_dict(d["constraints"]),
        config=config_from_dict(d["config"]),
        obstacle=obstacle,
    )


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))


def load_trajectory(path) -> Trajectory:
    """Bare trajectory from a .json or .csv file; no smoothing, no resample."""
    p = Path(path)
    if not p.exists():
        raise TrajectoryError(f"no such file: {p}")
    if p.suffix.lower() == ".csv":
        return Trajectory(_read_csv_points(p))
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise TrajectoryError(f"{p.name}: invalid JSON ({exc})") from None
    pts, _, _ = parse_trajectory_payload(payload)
    return Trajectory(pts)
