"""HTTP/WebSocket session service around the skill library.

The service is a thin adapter over the library: sessions only buffer raw
prompt points and cache the last rollout, so every response is reproducible
by direct library calls on the same inputs.  Each session's requests are
serialized; the library takes concurrent reads and exclusive writes.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, StreamingResponse

from .geometry import Trajectory, resample
from .skills import SkillConfig, SkillLibrary
from .trajio import rollout_lines

IDLE = "idle"
COLLECTING_DEMO = "collecting_demo"
COLLECTING_PROMPT = "collecting_prompt"
PREDICTING = "predicting"


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        return JSONResponse(status_code=self.status,
                            content={"code": self.code,
                                     "message": self.message,
                                     "detail": self.detail})


@dataclass
class Session:
    id: str
    state: str = IDLE
    prompt_t: list = field(default_factory=list)
    prompt_p: list = field(default_factory=list)
    last_status: dict | None = None
    cached_rollout: list | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


def _json_float(value):
    return None if value is None or not math.isfinite(value) else float(value)


class SessionService:
    """Session registry and the demonstrate/prompt/predict workflow."""

    def __init__(self, library: SkillLibrary | None = None,
                 config: SkillConfig | None = None, capacity: int = 64):
        self.config = config or SkillConfig()
        self.library = library if library is not None else SkillLibrary(self.config)
        self.capacity = capacity
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- session lifecycle -------------------------------------------------

    def create_session(self) -> str:
        with self._registry_lock:
            if len(self._sessions) >= self.capacity:
                raise ServiceError(429, "capacity_exceeded",
                                   f"session capacity {self.capacity} reached")
            sid = str(uuid.uuid4())
            self._sessions[sid] = Session(id=sid)
            return sid

    def get_session(self, sid: str) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise ServiceError(404, "not_found", f"no session {sid}") from None

    # -- demonstration -----------------------------------------------------

    def _unique_skill_id(self, label: str) -> str:
        base = label or "skill"
        if base not in self.library:
            return base
        n = 2
        while f"{base}_{n}" in self.library:
            n += 1
        return f"{base}_{n}"

    def submit_demonstration(self, sid: str, points: list, label: str,
                             sample_rate_hz: float | None = None) -> str:
        session = self.get_session(sid)
        with session.lock:
            if session.state != IDLE:
                raise ServiceError(409, "invalid_state",
                                   f"cannot demonstrate in state {session.state}")
            session.state = COLLECTING_DEMO
            try:
                demo = self._to_trajectory(points, sample_rate_hz)
                skill_id = self._unique_skill_id(label)
                self.library.learn(demo, skill_id)
                return skill_id
            except ValueError as exc:
                raise ServiceError(422, "invalid_input", str(exc)) from exc
            finally:
                session.state = IDLE

    def _to_trajectory(self, points: list, sample_rate_hz=None) -> Trajectory:
        if not points:
            raise ValueError("insufficient trajectory: no points")
        t = np.array([float(p["t"]) for p in points])
        xy = np.column_stack([[float(p["x"]) for p in points],
                              [float(p["y"]) for p in points]])
        rate = float(sample_rate_hz or self.config.sample_rate_hz)
        return resample(t, xy, rate)

    # -- prompt streaming --------------------------------------------------

    def add_prompt_points(self, sid: str, points: list) -> dict:
        session = self.get_session(sid)
        with session.lock:
            if session.state == IDLE:
                session.state = COLLECTING_PROMPT
                session.prompt_t.clear()
                session.prompt_p.clear()
                session.cached_rollout = None
            elif session.state != COLLECTING_PROMPT:
                raise ServiceError(409, "invalid_state",
                                   f"cannot stream prompt in state {session.state}")
            for p in points:
                session.prompt_t.append(float(p["t"]))
                session.prompt_p.append((float(p["x"]), float(p["y"])))
            status = self._classify_status(session)
            session.last_status = status
            return status

    def _resampled_prompt(self, session: Session) -> Trajectory | None:
        if len(session.prompt_t) < 2:
            return None
        try:
            return resample(np.array(session.prompt_t),
                            np.array(session.prompt_p),
                            self.config.sample_rate_hz)
        except ValueError:
            return None

    def _classify_status(self, session: Session) -> dict:
        status = {"state": session.state, "samples": 0, "classified": None,
                  "margin": None, "lambda": None, "rotation": None,
                  "ambiguous": False, "scores": None, "detail": "collecting"}
        if len(self.library) == 0:
            status["detail"] = "library is empty"
            return status
        prompt = self._resampled_prompt(session)
        if prompt is None:
            return status
        status["samples"] = len(prompt)
        max_window = max(s.window for s in
                         (self.library.get(i) for i in self.library.ids()))
        k = len(prompt) - 1
        if k < max_window:
            status["detail"] = "insufficient length"
            return status
        reached = any(self.library.get(i).checkpoints.times[0] <= k
                      for i in self.library.ids())
        if not reached:
            status["detail"] = "insufficient length: no checkpoint reached"
            return status
        result = self.library.classify(prompt)
        status.update({
            "classified": result.selected,
            "margin": _json_float(result.margin),
            "lambda": _json_float(result.scale),
            "rotation": _json_float(result.rotation),
            "ambiguous": result.ambiguous,
            "scores": {k2: float(v) for k2, v in sorted(result.scores.items())},
            "detail": None,
        })
        return status

    # -- finalize / rollout ------------------------------------------------

    def finalize_prompt(self, sid: str) -> list:
        """NDJSON lines of the rollout; idempotent replay after completion."""
        session = self.get_session(sid)
        with session.lock:
            if session.state == IDLE and session.cached_rollout is not None:
                return session.cached_rollout
            if session.state != COLLECTING_PROMPT:
                raise ServiceError(409, "invalid_state",
                                   "no prompt to finalize")
            prompt = self._resampled_prompt(session)
            if prompt is None:
                session.state = IDLE
                raise ServiceError(422, "invalid_input",
                                   "insufficient prompt: need at least two points")
            session.state = PREDICTING
            try:
                result = self.library.classify(prompt)
                skill = self.library.get(result.selected)
                roll = skill.complete(prompt)
            except ValueError as exc:
                raise ServiceError(422, "invalid_input", str(exc)) from exc
            finally:
                session.state = IDLE
                session.prompt_t.clear()
                session.prompt_p.clear()
            session.cached_rollout = rollout_lines(roll)
            return session.cached_rollout


def create_app(library: SkillLibrary | None = None,
               config: SkillConfig | None = None,
               capacity: int = 64) -> FastAPI:
    service = SessionService(library=library, config=config,
                             capacity=capacity)
    app = FastAPI(title="motiongp session service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def _service_error(_, exc: ServiceError):
        return exc.response()

    @app.post("/sessions", status_code=201)
    def create_session():
        return {"id": service.create_session()}

    @app.post("/sessions/{sid}/demonstration")
    def submit_demonstration(sid: str, body: dict):
        skill_id = service.submit_demonstration(
            sid, body.get("points", []), body.get("label", ""),
            body.get("sample_rate_hz"))
        return {"skill_id": skill_id}

    @app.post("/sessions/{sid}/prompt/points")
    def add_prompt_points(sid: str, body: dict):
        return service.add_prompt_points(sid, body.get("points", []))

    @app.post("/sessions/{sid}/prompt/finalize")
    def finalize_prompt(sid: str):
        lines = service.finalize_prompt(sid)

        def stream():
            for line in lines:
                yield line + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.websocket("/sessions/{sid}/stream")
    async def stream_channel(websocket: WebSocket, sid: str):
        await websocket.accept()
        try:
            service.get_session(sid)
        except ServiceError as exc:
            await websocket.send_json({"type": "error", "code": exc.code,
                                       "message": exc.message})
            await websocket.close()
            return
        try:
            while True:
                msg = await websocket.receive_json()
                kind = msg.get("type")
                try:
                    if kind == "demonstration":
                        skill_id = service.submit_demonstration(
                            sid, msg.get("points", []), msg.get("label", ""),
                            msg.get("sample_rate_hz"))
                        await websocket.send_json({"type": "skill",
                                                   "skill_id": skill_id})
                    elif kind in ("prompt_point", "prompt_points"):
                        points = (msg.get("points")
                                  if kind == "prompt_points"
                                  else [msg.get("point", {})])
                        status = service.add_prompt_points(sid, points)
                        await websocket.send_json({"type": "status", **status})
                    elif kind == "finalize":
                        for line in service.finalize_prompt(sid):
                            record = json.loads(line)
                            tag = ("trailer" if "stop_reason" in record
                                   else "rollout_point")
                            await websocket.send_json({"type": tag, **record})
                        await websocket.send_json({"type": "done"})
                    else:
                        await websocket.send_json(
                            {"type": "error", "code": "bad_request",
                             "message": f"unknown message type {kind!r}"})
                except ServiceError as exc:
                    await websocket.send_json({"type": "error",
                                               "code": exc.code,
                                               "message": exc.message})
        except WebSocketDisconnect:
            return

    return app
