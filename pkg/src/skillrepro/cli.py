"""Command-line interface.

Subcommands: fit, reproduce, refine, metrics, serve, gen-fixture.
Exit codes: 0 on success/convergence, 2 when the solver had to fall
back or hit its iteration cap, 1 on any error (usage errors included).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fixtures, io
from .costs import ConstraintSet
from .errors import SkillReproError
from .mixture import gmr, select_k_bic
from .solver import MultiCoordWeights, SolveStatus, SolverConfig, refine, reproduce
from .trajectory import DemonstrationSet, Label, resample

_FALLBACK_STATUSES = (SolveStatus.INDEFINITE_FALLBACK, SolveStatus.ITERATIVE_MAX_ITERS)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for solver fallback
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common_flags(p: _Parser):
    p.add_argument("--config", help="JSON file with solver settings")
    p.add_argument("--lambda", dest="lam", type=float, help="elastic weight")
    p.add_argument("--rho", type=float, help="constraint penalty constant")
    p.add_argument("--gamma", type=float, help="failure repulsion gain")
    p.add_argument("--alphas", help="frame weights as c,g,l")
    p.add_argument("--resample", type=int, help="common trajectory length")
    p.add_argument("--seed", type=int, help="random seed")


def _add_demo_flags(p: _Parser):
    p.add_argument("--demos", nargs="+", required=True,
                   help="demonstration files (.json or .csv)")
    p.add_argument("--labels",
                   help="comma list of success/failure, one per file; "
                        "overrides labels embedded in the files")


def _add_out_flags(p: _Parser):
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _resolve_config(args) -> SolverConfig:
    cfg = SolverConfig()
    if getattr(args, "config", None):
        cfg = io.config_from_dict(json.loads(Path(args.config).read_text()), base=cfg)
    updates = {}
    if getattr(args, "lam", None) is not None:
        updates["lam"] = args.lam
    if getattr(args, "rho", None) is not None:
        updates["rho"] = args.rho
    if getattr(args, "gamma", None) is not None:
        updates["gamma"] = args.gamma
    if getattr(args, "resample", None) is not None:
        updates["resample_len"] = args.resample
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "alphas", None):
        parts = [float(v) for v in args.alphas.split(",")]
        if len(parts) != 3:
            raise SkillReproError("--alphas needs three values: c,g,l")
        updates["weights"] = MultiCoordWeights(*parts)
    return replace(cfg, **updates) if updates else cfg


def _load_demos(args, cfg: SolverConfig) -> DemonstrationSet:
    labels = None
    if args.labels:
        labels = [s.strip() for s in args.labels.split(",")]
        if len(labels) != len(args.demos):
            raise SkillReproError(
                f"--labels lists {len(labels)} entries for {len(args.demos)} files"
            )
    succ = []
    fail = []
    for i, path in enumerate(args.demos):
        demo = io.import_demo(path, label=labels[i] if labels else None,
                              target_len=cfg.resample_len)
        (succ if demo.label is Label.SUCCESSFUL else fail).append(demo)
    return DemonstrationSet(tuple(succ), tuple(fail))


def _parse_constraints(args, cfg: SolverConfig) -> ConstraintSet:
    pairs = []
    for spec_str in args.constraint or []:
        try:
            idx_part, pt_part = spec_str.split(":", 1)
            idx = int(idx_part)
            point = [float(v) for v in pt_part.split(",")]
        except ValueError:
            raise SkillReproError(
                f"bad --constraint {spec_str!r}, expected i:x,y[,z]"
            ) from None
        pairs.append((idx, point))
    return ConstraintSet.from_pairs(pairs, rho=cfg.rho)


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_fit(args) -> int:
    cfg = _resolve_config(args)
    demos = _load_demos(args, cfg)
    model = select_k_bic([d.trajectory for d in demos.all_demos()],
                         cfg.fit_config(cfg.seed))
    path = gmr(model, np.linspace(0.0, 1.0, cfg.resample_len))
    out = {
        "k": model.n_components,
        "bic_table": [
            {"k": c.k, "loglik": c.loglik, "bic": c.bic, "error": c.error}
            for c in (model.bic_table or ())
        ],
        "priors": model.priors.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "regression": {
            "time": path.time.tolist(),
            "means": path.means.tolist(),
        },
    }
    _emit(io.dumps_canonical(out), args.out)
    return 0


def _cmd_reproduce(args) -> int:
    cfg = _resolve_config(args)
    demos = _load_demos(args, cfg)
    constraints = _parse_constraints(args, cfg)
    rep = reproduce(demos, constraints, cfg)
    if args.format == "csv":
        _emit(io.trajectory_to_csv(rep.trajectory), args.out)
    else:
        _emit(io.dumps_canonical(io.reproduction_to_dict(rep)), args.out)
    return 2 if rep.report.status in _FALLBACK_STATUSES else 0


def _parse_obstacle(text: str) -> fixtures.Obstacle:
    try:
        center_part, radius_part = text.rsplit(":", 1)
        center = [float(v) for v in center_part.split(",")]
        radius = float(radius_part)
    except ValueError:
        raise SkillReproError(
            f"bad --obstacle {text!r}, expected x,y:radius"
        ) from None
    return fixtures.Obstacle(center=np.asarray(center), radius=radius)


def _cmd_refine(args) -> int:
    cfg = _resolve_config(args)
    demos = _load_demos(args, cfg)
    constraints = _parse_constraints(args, cfg)
    obstacle = _parse_obstacle(args.obstacle)
    result = refine(demos, constraints, fixtures.collision_labeler(obstacle),
                    cfg, max_iters=args.max_iters)
    out = {
        "converged": result.converged,
        "iterations": result.iterations,
        "labels": [s.label.value for s in result.steps],
        "final": io.reproduction_to_dict(result.final),
    }
    _emit(io.dumps_canonical(out), args.out)
    return 0 if result.converged else 2


def _cmd_metrics(args) -> int:
    from .metrics import evaluate

    a = io.load_trajectory(args.a)
    b = io.load_trajectory(args.b)
    if b.length != a.length:
        b = resample(b, a.length)  # measure against a's sampling
    report = evaluate(a, b)
    _emit(io.dumps_canonical(io.metric_report_to_dict(report)), args.out)
    return 0


def _cmd_gen_fixture(args) -> int:
    sc = fixtures.build(args.name, args.seed)
    _emit(io.dumps_canonical(io.scenario_to_dict(sc)), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = args.bind or os.environ.get("SKILLREPRO_BIND", "127.0.0.1:8075")
    try:
        host, port_text = bind.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        raise SkillReproError(f"bad bind address {bind!r}, expected host:port") from None
    data_dir = args.data_dir or os.environ.get("SKILLREPRO_DATA_DIR")
    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="info")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="skillrepro",
                     description="Learn and reproduce trajectory skills from "
                                 "labeled demonstrations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the demonstration mixture model")
    _add_demo_flags(p_fit)
    _add_common_flags(p_fit)
    _add_out_flags(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_rep = sub.add_parser("reproduce", help="reproduce a skill trajectory")
    _add_demo_flags(p_rep)
    _add_common_flags(p_rep)
    _add_out_flags(p_rep)
    p_rep.add_argument("--constraint", action="append",
                       help="point constraint i:x,y[,z]; repeatable")
    p_rep.set_defaults(func=_cmd_reproduce)

    p_ref = sub.add_parser("refine", help="iterate reproduction with an "
                                          "automatic collision labeler")
    _add_demo_flags(p_ref)
    _add_common_flags(p_ref)
    _add_out_flags(p_ref)
    p_ref.add_argument("--constraint", action="append",
                       help="point constraint i:x,y[,z]; repeatable")
    p_ref.add_argument("--obstacle", required=True,
                       help="disk obstacle x,y:radius for the labeler")
    p_ref.add_argument("--max-iters", type=int, default=10)
    p_ref.set_defaults(func=_cmd_refine)

    p_met = sub.add_parser("metrics", help="compare two trajectories")
    p_met.add_argument("--a", required=True, help="first trajectory file")
    p_met.add_argument("--b", required=True,
                       help="second trajectory file (resampled to match --a)")
    p_met.add_argument("--out")
    p_met.set_defaults(func=_cmd_metrics)

    p_gen = sub.add_parser("gen-fixture", help="emit a synthetic scenario")
    p_gen.add_argument("name", choices=sorted(fixtures.SCENARIO_BUILDERS))
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out")
    p_gen.set_defaults(func=_cmd_gen_fixture)

    p_srv = sub.add_parser("serve", help="run the HTTP session service")
    p_srv.add_argument("--bind", help="host:port (default from SKILLREPRO_BIND)")
    p_srv.add_argument("--data-dir",
                       help="session log directory (default from "
                            "SKILLREPRO_DATA_DIR)")
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SkillReproError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as exc:
        print(f"error: linear algebra failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
