"""HTTP session service: upload a scene, read reports, run manipulations,
undo. One designer per session; mutating calls on a busy session return 409.

Sessions live in memory with TTL eviction; an optional snapshot directory
persists them across restarts. Manipulation budgets above ASYNC_BUDGET run on
a background thread and are polled via a job URL (202 flow).
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import InfeasibleRequest, ParseError, ValidationError, VLCError
from .io import (
    SceneDocument,
    config_hash,
    parse_scene_document,
    scene_hash,
)
from .manipulate import (
    ConstraintSet,
    ManipulationRequest,
    ManipulationResult,
    manipulate,
    manipulate_segment,
)
from .scale import Attribute, ComplexityReport, ScaleConfig, identify

SESSION_TTL_SECONDS = 2 * 3600
ASYNC_BUDGET = 20_000


@dataclass
class Snapshot:
    doc_dict: dict
    report: dict
    scene_hash: str
    change_log: list[dict] = field(default_factory=list)


@dataclass
class Job:
    job_id: str
    status: str = "running"  # running | done | failed
    result: dict | None = None
    error: str | None = None


@dataclass
class Session:
    session_id: str
    doc: SceneDocument
    path_name: str
    config: ScaleConfig
    history: list[Snapshot]
    lock: threading.Lock = field(default_factory=threading.Lock)
    jobs: dict[str, Job] = field(default_factory=dict)
    last_access: float = field(default_factory=time.monotonic)

    def touch(self):
        self.last_access = time.monotonic()

    def current(self) -> Snapshot:
        return self.history[-1]


class SessionStore:
    def __init__(self, ttl: float = SESSION_TTL_SECONDS):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.ttl = ttl

    def sweep(self):
        now = time.monotonic()
        with self._lock:
            dead = [
                sid
                for sid, s in self._sessions.items()
                if now - s.last_access > self.ttl and not s.lock.locked()
            ]
            for sid in dead:
                del self._sessions[sid]

    def add(self, session: Session):
        with self._lock:
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> Session | None:
        self.sweep()
        with self._lock:
            session = self._sessions.get(session_id)
        if session is not None:
            session.touch()
        return session

    def all_sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())


def _error(status: int, message: str, pointer: str | None = None) -> JSONResponse:
    body = {"error": message}
    if pointer is not None:
        body["pointer"] = pointer
    return JSONResponse(status_code=status, content=body)


def _report_payload(session: Session) -> dict:
    snap = session.current()
    return {
        "report": snap.report,
        "scene_hash": snap.scene_hash,
        "config_hash": config_hash(session.config),
        "path_name": session.path_name,
    }


def _snapshot(session_doc: SceneDocument, path_name: str, config: ScaleConfig,
              report: ComplexityReport, change_log: list[dict]) -> Snapshot:
    return Snapshot(
        doc_dict=session_doc.to_dict(),
        report=report.to_dict(),
        scene_hash=scene_hash(session_doc),
        change_log=change_log,
    )


def create_app(
    config: ScaleConfig | None = None,
    cors_origin: str | None = None,
    snapshot_dir: str | None = None,
    ttl_seconds: float = SESSION_TTL_SECONDS,
) -> FastAPI:
    default_config = config or ScaleConfig()
    store = SessionStore(ttl=ttl_seconds)

    def _load_snapshots(snap_path: Path):
        if not snap_path.is_dir():
            return
        for f in sorted(snap_path.glob("session-*.json")):
            try:
                data = json.loads(f.read_text(encoding="utf-8"))
                doc = parse_scene_document(data["scene"])
                cfg = ScaleConfig.from_dict(data["config"])
                session = Session(
                    session_id=data["session_id"],
                    doc=doc,
                    path_name=data["path_name"],
                    config=cfg,
                    history=[
                        Snapshot(
                            doc_dict=s["scene"],
                            report=s["report"],
                            scene_hash=s["scene_hash"],
                            change_log=s.get("change_log", []),
                        )
                        for s in data["history"]
                    ],
                )
                store.add(session)
            except (VLCError, KeyError, json.JSONDecodeError):
                continue

    def _save_snapshots(snap_path: Path):
        snap_path.mkdir(parents=True, exist_ok=True)
        for session in store.all_sessions():
            payload = {
                "session_id": session.session_id,
                "scene": session.current().doc_dict,
                "path_name": session.path_name,
                "config": session.config.to_dict(),
                "history": [
                    {
                        "scene": s.doc_dict,
                        "report": s.report,
                        "scene_hash": s.scene_hash,
                        "change_log": s.change_log,
                    }
                    for s in session.history
                ],
            }
            out = snap_path / f"session-{session.session_id}.json"
            out.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        if snapshot_dir:
            _load_snapshots(Path(snapshot_dir))
        yield
        if snapshot_dir:
            _save_snapshots(Path(snapshot_dir))

    app = FastAPI(title="visuo-locomotive complexity service", lifespan=lifespan)
    app.state.store = store

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    async def _json_body(request: Request) -> dict | JSONResponse:
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, f"request body is not valid JSON: {exc}", "/")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object", "/")
        return body

    @app.post("/api/sessions")
    async def create_session(request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        scene_raw = body.get("scene")
        if scene_raw is None:
            return _error(400, "missing required field 'scene'", "/scene")
        path_name = body.get("path", "main")
        if not isinstance(path_name, str):
            return _error(400, "expected a string", "/path")
        try:
            doc = parse_scene_document(scene_raw)
        except ParseError as exc:
            return _error(400, exc.reason, exc.pointer)
        except ValidationError as exc:
            return _error(422, str(exc))
        cfg_raw = body.get("config") or {}
        if not isinstance(cfg_raw, dict):
            return _error(400, "expected an object", "/config")
        try:
            cfg = ScaleConfig.from_dict({**default_config.to_dict(), **cfg_raw})
        except (VLCError, TypeError) as exc:
            return _error(400, f"bad config: {exc}", "/config")
        if path_name not in doc.path_lines:
            return _error(422, f"path not found: {path_name!r} (have {doc.path_names()})")
        try:
            nav = doc.nav_path(path_name, cfg.turn_threshold_deg)
            report = identify(doc.scene, nav, cfg)
        except VLCError as exc:
            return _error(422, str(exc))
        session = Session(
            session_id=uuid.uuid4().hex,
            doc=doc,
            path_name=path_name,
            config=cfg,
            history=[],
        )
        session.history.append(_snapshot(doc, path_name, cfg, report, []))
        store.add(session)
        return JSONResponse(
            status_code=201,
            content={"session": session.session_id, **_report_payload(session)},
        )

    @app.get("/api/sessions/{session_id}/report")
    def get_report(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        return _report_payload(session)

    @app.get("/api/sessions/{session_id}/scene")
    def get_scene(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        snap = session.current()
        return {"scene": snap.doc_dict, "scene_hash": snap.scene_hash}

    def _run_manipulation(session: Session, body: dict) -> ManipulationResult:
        cfg = session.config
        doc = parse_scene_document(session.current().doc_dict)
        nav = doc.nav_path(session.path_name, cfg.turn_threshold_deg)
        seed = int(body.get("seed", 0))
        budget = int(body.get("budget", 5000))
        constraints = ConstraintSet(
            min_width=float(body.get("min_width", 1.2)),
            max_width=float(body.get("max_width", 12.0)),
        )
        segment = body.get("segment")
        if segment is not None:
            attribute = body.get("attribute", "clutter")
            return manipulate_segment(
                doc.scene,
                nav,
                int(segment),
                Attribute(attribute),
                int(body.get("segment_target", body.get("target_class", 3))),
                float(body.get("overall_target", 3.0)),
                constraints=constraints,
                seed=seed,
                budget=budget,
                config=cfg,
            )
        attrs = body.get("attributes")
        request = ManipulationRequest(
            target_class=float(body.get("target_class", 3.0)),
            attributes=tuple(Attribute(a) for a in attrs) if attrs else tuple(Attribute),
            constraints=constraints,
            seed=seed,
            budget=budget,
        )
        return manipulate(doc.scene, nav, request, cfg)

    def _commit_result(session: Session, result: ManipulationResult) -> dict:
        new_doc = session.doc.replace_scene(
            result.scene, {**session.doc.path_lines, session.path_name: result.line}
        )
        session.doc = new_doc
        snap = _snapshot(new_doc, session.path_name, session.config, result.after_report, result.change_log())
        session.history.append(snap)
        return {
            "result": result.to_dict(),
            "scene": snap.doc_dict,
            "scene_hash": snap.scene_hash,
            "report": snap.report,
        }

    @app.post("/api/sessions/{session_id}/manipulate")
    async def post_manipulate(session_id: str, request: Request):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        if not session.lock.acquire(blocking=False):
            return _error(409, "a manipulation is already running for this session")
        budget = int(body.get("budget", 5000))
        if budget > ASYNC_BUDGET:
            job = Job(job_id=uuid.uuid4().hex)
            session.jobs[job.job_id] = job

            def runner():
                try:
                    result = _run_manipulation(session, body)
                    job.result = _commit_result(session, result)
                    job.status = "done"
                except VLCError as exc:
                    job.status = "failed"
                    job.error = str(exc)
                except Exception as exc:  # pragma: no cover - defensive
                    job.status = "failed"
                    job.error = f"internal error: {exc}"
                finally:
                    session.lock.release()

            threading.Thread(target=runner, daemon=True).start()
            return JSONResponse(
                status_code=202,
                content={
                    "job": job.job_id,
                    "poll": f"/api/sessions/{session_id}/jobs/{job.job_id}",
                },
            )
        try:
            result = _run_manipulation(session, body)
            payload = _commit_result(session, result)
        except InfeasibleRequest as exc:
            return _error(422, str(exc))
        except (ParseError, ValidationError, VLCError) as exc:
            return _error(422, str(exc))
        except (TypeError, ValueError) as exc:
            return _error(400, f"bad request: {exc}")
        finally:
            session.lock.release()
        return payload

    @app.get("/api/sessions/{session_id}/jobs/{job_id}")
    def get_job(session_id: str, job_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        job = session.jobs.get(job_id)
        if job is None:
            return _error(404, "unknown job")
        if job.status == "running":
            return {"status": "running"}
        if job.status == "failed":
            return {"status": "failed", "error": job.error}
        return {"status": "done", **job.result}

    @app.post("/api/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        if not session.lock.acquire(blocking=False):
            return _error(409, "a manipulation is already running for this session")
        try:
            if len(session.history) <= 1:
                return _error(409, "nothing to undo: session is at its initial state")
            session.history.pop()
            snap = session.current()
            session.doc = parse_scene_document(snap.doc_dict)
            return {
                "scene": snap.doc_dict,
                "scene_hash": snap.scene_hash,
                "report": snap.report,
            }
        finally:
            session.lock.release()

    return app
