"""HTTP session service.

Sessions hold demonstrations, constraints, and solver settings; every
mutation appends to a per-session JSON-lines event log so state
survives restarts byte-for-byte. Mutations and solves for one session
are serialized under its lock; sessions are independent. The version
counter tracks solver-input mutations only, so identical reproduce
calls on identical state return identical bodies.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException

from . import io
from .costs import ConstraintSet
from .errors import SkillReproError
from .metrics import evaluate
from .solver import SolverConfig, reproduce
from .trajectory import Demonstration, DemonstrationSet, Label, Trajectory, resample


class SessionState:
    def __init__(self, session_id: str, config: SolverConfig):
        self.id = session_id
        self.config = config
        self.demos = DemonstrationSet()
        self.constraints = ConstraintSet((), rho=config.rho)
        self.history: list[dict] = []
        self.version = 0
        self.lock = threading.Lock()


def _apply_event(state: SessionState, event: dict) -> bool:
    """Mutate state per one event; returns True when the event versions."""
    kind = event["event"]
    if kind == "add_demo":
        d = event["demo"]
        demo = Demonstration(
            id=d["id"],
            trajectory=Trajectory(np.asarray(d["points"], dtype=float)),
            label=Label.parse(d["label"]),
        )
        if demo.label is Label.SUCCESSFUL:
            state.demos = DemonstrationSet(
                state.demos.successes + (demo,), state.demos.failures)
        else:
            state.demos = DemonstrationSet(
                state.demos.successes, state.demos.failures + (demo,))
        return True
    if kind == "relabel_demo":
        target = event["id"]
        label = Label.parse(event["label"])
        keep_s = [d for d in state.demos.successes if d.id != target]
        keep_f = [d for d in state.demos.failures if d.id != target]
        found = [d for d in state.demos.all_demos() if d.id == target]
        if not found:
            raise SkillReproError(f"unknown demonstration {target!r}")
        moved = Demonstration(id=target, trajectory=found[0].trajectory, label=label)
        if label is Label.SUCCESSFUL:
            keep_s.append(moved)
        else:
            keep_f.append(moved)
        state.demos = DemonstrationSet(tuple(keep_s), tuple(keep_f))
        return True
    if kind == "delete_demo":
        target = event["id"]
        if not any(d.id == target for d in state.demos.all_demos()):
            raise SkillReproError(f"unknown demonstration {target!r}")
        state.demos = DemonstrationSet(
            tuple(d for d in state.demos.successes if d.id != target),
            tuple(d for d in state.demos.failures if d.id != target),
        )
        return True
    if kind == "set_constraints":
        state.constraints = io.constraints_from_dict(event["constraints"])
        return True
    if kind == "set_config":
        state.config = io.config_from_dict(event["config"])
        return True
    if kind == "reproduction":
        state.history.append({"reproduction": event["reproduction"], "label": None})
        return False
    if kind == "label_reproduction":
        idx = event["index"]
        if not (0 <= idx < len(state.history)):
            raise SkillReproError(f"no reproduction at index {idx}")
        state.history[idx]["label"] = event["label"]
        return False
    raise SkillReproError(f"unknown event kind {kind!r}")


class SessionStore:
    def __init__(self, data_dir: "str | Path | None" = None):
        self.sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            for log in sorted(self.data_dir.glob("*.jsonl")):
                self._replay(log)

    def _replay(self, log: Path):
        lines = [ln for ln in log.read_text().splitlines() if ln.strip()]
        if not lines:
            return
        head = json.loads(lines[0])
        if head.get("event") != "create":
            return
        state = SessionState(
            session_id=head["session_id"],
            config=io.config_from_dict(head.get("config", {})),
        )
        for line in lines[1:]:
            if _apply_event(state, json.loads(line)):
                state.version += 1
        self.sessions[state.id] = state

    def _log_path(self, session_id: str) -> "Path | None":
        if self.data_dir is None:
            return None
        return self.data_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict):
        path = self._log_path(session_id)
        if path is None:
            return
        with path.open("a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def create(self, session_id: "str | None", config: SolverConfig) -> SessionState:
        with self._lock:
            sid = session_id or uuid.uuid4().hex
            if sid in self.sessions:
                raise SkillReproError(f"session {sid!r} already exists")
            state = SessionState(sid, config)
            self.sessions[sid] = state
            self._append(sid, {
                "event": "create",
                "session_id": sid,
                "config": io.config_to_dict(config),
            })
            return state

    def get(self, session_id: str) -> SessionState:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id!r}") from None

    def commit(self, state: SessionState, event: dict):
        """Apply and persist one event under the caller-held session lock."""
        if _apply_event(state, event):
            state.version += 1
        self._append(state.id, event)


def _check_version(state: SessionState, expected):
    if expected is not None and int(expected) != state.version:
        raise HTTPException(
            status_code=409,
            detail=f"version conflict: expected {expected}, actual {state.version}",
        )


def _session_body(state: SessionState) -> dict:
    return {
        "session_id": state.id,
        "version": state.version,
        "config": io.config_to_dict(state.config),
        "demos": io.demoset_to_dict(state.demos),
        "constraints": io.constraints_to_dict(state.constraints),
        "history": state.history,
    }


def create_app(data_dir: "str | Path | None" = None) -> FastAPI:
    store = SessionStore(data_dir)
    app = FastAPI(title="skillrepro service")
    app.state.store = store

    @app.exception_handler(SkillReproError)
    async def _domain_error(request, exc: SkillReproError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(default={})):
        config = io.config_from_dict(body.get("config", {}))
        state = store.create(body.get("id"), config)
        return {"session_id": state.id, "version": state.version}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        state = store.get(sid)
        with state.lock:
            return _session_body(state)

    @app.post("/sessions/{sid}/demos")
    def add_demo(sid: str, body: dict = Body(...)):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            demo = io.import_demo(body, target_len=state.config.resample_len)
            if any(d.id == demo.id for d in state.demos.all_demos()):
                raise SkillReproError(f"demonstration id {demo.id!r} already exists")
            store.commit(state, {"event": "add_demo", "demo": io.demo_to_dict(demo)})
            return {"version": state.version, "demo_id": demo.id}

    @app.patch("/sessions/{sid}/demos/{demo_id}")
    def relabel_demo(sid: str, demo_id: str, body: dict = Body(...)):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            if "label" not in body:
                raise SkillReproError("relabel needs a label")
            store.commit(state, {
                "event": "relabel_demo",
                "id": demo_id,
                "label": Label.parse(body["label"]).value,
            })
            return {"version": state.version}

    @app.delete("/sessions/{sid}/demos/{demo_id}")
    def delete_demo(sid: str, demo_id: str, expected_version: "int | None" = None):
        state = store.get(sid)
        with state.lock:
            _check_version(state, expected_version)
            store.commit(state, {"event": "delete_demo", "id": demo_id})
            return {"version": state.version}

    @app.put("/sessions/{sid}/constraints")
    def set_constraints(sid: str, body: dict = Body(...)):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            cs = io.constraints_from_dict(body)
            cs.check_range(state.config.resample_len)
            store.commit(state, {
                "event": "set_constraints",
                "constraints": io.constraints_to_dict(cs),
            })
            return {"version": state.version}

    @app.put("/sessions/{sid}/config")
    def set_config(sid: str, body: dict = Body(...)):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            cfg = io.config_from_dict(body.get("config", {}), base=state.config)
            store.commit(state, {
                "event": "set_config",
                "config": io.config_to_dict(cfg),
            })
            return {"version": state.version}

    def _run_reproduce(state: SessionState) -> dict:
        rep = reproduce(state.demos, state.constraints, state.config)
        rep_dict = io.reproduction_to_dict(rep)
        store.commit(state, {"event": "reproduction", "reproduction": rep_dict})
        return rep_dict

    @app.post("/sessions/{sid}/reproduce")
    def reproduce_session(sid: str, body: dict = Body(default={})):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            rep_dict = _run_reproduce(state)
            return {
                "session_id": state.id,
                "version": state.version,
                "reproduction": rep_dict,
            }

    @app.post("/sessions/{sid}/iterate")
    def iterate_session(sid: str, body: dict = Body(...)):
        state = store.get(sid)
        with state.lock:
            _check_version(state, body.pop("expected_version", None))
            if not state.history:
                raise SkillReproError("no reproduction to label; reproduce first")
            label = Label.parse(body.get("label", ""))
            idx = len(state.history) - 1
            store.commit(state, {
                "event": "label_reproduction",
                "index": idx,
                "label": label.value,
            })
            if label is Label.SUCCESSFUL:
                return {
                    "session_id": state.id,
                    "version": state.version,
                    "converged": True,
                    "iterations": len(state.history),
                    "reproduction": state.history[idx]["reproduction"],
                }
            # failed attempt joins the failure set, then another solve runs
            existing = {d.id for d in state.demos.all_demos()}
            k = 1
            while f"refined-{k}" in existing:
                k += 1
            attempt = state.history[idx]["reproduction"]["trajectory"]
            store.commit(state, {
                "event": "add_demo",
                "demo": {
                    "id": f"refined-{k}",
                    "label": Label.FAILED.value,
                    "dim": attempt["dim"],
                    "points": attempt["points"],
                },
            })
            rep_dict = _run_reproduce(state)
            return {
                "session_id": state.id,
                "version": state.version,
                "converged": False,
                "iterations": len(state.history),
                "reproduction": rep_dict,
            }

    @app.post("/metrics")
    def metrics(body: dict = Body(...)):
        if "a" not in body or "b" not in body:
            raise SkillReproError("metrics needs trajectories 'a' and 'b'")
        pa, _, _ = io.parse_trajectory_payload(body["a"])
        pb, _, _ = io.parse_trajectory_payload(body["b"])
        a = Trajectory(pa)
        b = Trajectory(pb)
        if b.length != a.length:
            b = resample(b, a.length)
        return io.metric_report_to_dict(evaluate(a, b))

    return app
