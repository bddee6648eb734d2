"""HTTP service: chat with sessions, graph inspection, health, usage log."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import (
    MODE_LOCAL,
    MODES,
    ChatSession,
    ChatTurn,
    Engine,
    NoMatch,
    NoRelevantCommunities,
    ProviderFailure,
)
from .kg.leiden import CommunityAssignment
from .sessions import SessionStore
from .usagelog import UsageEvent, UsageLog, utc_now

log = logging.getLogger(__name__)


@dataclass
class EngineState:
    """Immutable snapshot the service answers from; swapped whole on rebuild."""

    engine: Engine
    manifest: dict
    assignments: list[CommunityAssignment] = field(default_factory=list)
    provider_kind: str = "mock"

    @property
    def built(self) -> bool:
        return len(self.engine.chunk_index) > 0


class TokenBucket:
    """Per-key token bucket; refill is linear, capacity caps bursts."""

    def __init__(self, capacity: int, refill_per_s: float):
        self.capacity = capacity
        self.refill = refill_per_s
        self._state: dict[str, tuple[float, float]] = {}
        self._lock = threading.Lock()

    def allow(self, key: str) -> bool:
        now = time.monotonic()
        with self._lock:
            tokens, last = self._state.get(key, (float(self.capacity), now))
            tokens = min(float(self.capacity), tokens + (now - last) * self.refill)
            if tokens < 1.0:
                self._state[key] = (tokens, now)
                return False
            self._state[key] = (tokens - 1.0, now)
            return True


class ChatRequest(BaseModel):
    question: str = ""
    session_id: str | None = None
    mode: str | None = None


class ServiceState:
    def __init__(
        self,
        engine_state: EngineState | None,
        sessions: SessionStore,
        usage: UsageLog,
        rate_capacity: int = 30,
        rate_refill_per_s: float = 10.0,
        debug: bool = False,
    ):
        self._engine_state = engine_state
        self._swap_lock = threading.Lock()
        self.sessions = sessions
        self.usage = usage
        self.bucket = TokenBucket(rate_capacity, rate_refill_per_s)
        self.debug = debug

    @property
    def engine_state(self) -> EngineState | None:
        return self._engine_state

    def swap_engine(self, new_state: EngineState) -> None:
        with self._swap_lock:
            self._engine_state = new_state


def _error(status: int, error_type: str, detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"type": error_type, "detail": detail}}
    )


def create_app(
    state: ServiceState,
    frontend_dir: str | Path | None = None,
    reloader=None,
) -> FastAPI:
    """Build the API app.

    ``reloader`` is an optional zero-argument callable returning a fresh
    EngineState; when given, POST /admin/reload swaps the served snapshot
    atomically (rebuilds themselves happen out-of-band via the CLI).
    """
    app = FastAPI(title="graphchat", version="0.1.0")
    app.state.service = state

    @app.get("/health")
    def health() -> dict[str, Any]:
        es = state.engine_state
        if es is None or not es.built:
            return {"built": False}
        reachable = True
        ping = getattr(es.engine.provider, "ping", None)
        if callable(ping):
            reachable = bool(ping())
        return {
            "built": True,
            "provider": {"kind": es.provider_kind, "reachable": reachable},
            "template_version": es.manifest.get("graph", {}).get("template_version"),
        }

    @app.post("/chat")
    def chat(req: ChatRequest, request: Request):
        client = request.client.host if request.client else "unknown"
        if not state.bucket.allow(client):
            return _error(429, "rate_limited", "too many requests")
        es = state.engine_state
        if es is None or not es.built:
            return _error(503, "not_built", "engine artifacts not loaded")
        question = req.question.strip()
        if not question:
            return _error(400, "empty_question", "question must be non-empty")
        mode = req.mode or MODE_LOCAL
        if mode not in MODES:
            return _error(400, "unknown_mode", f"mode must be one of {MODES}")

        session_id = req.session_id or None
        session = state.sessions.get(session_id) if session_id else None
        if session is None:
            session = ChatSession(session_id=session_id) if session_id else ChatSession()

        lock = state.sessions.lock_for(session.session_id)
        with lock:
            started = time.perf_counter()
            outcome = es.engine.answer(question, session, mode=mode)
            latency_ms = (time.perf_counter() - started) * 1000.0

            if isinstance(outcome, ProviderFailure):
                return _error(502, "provider_failure", outcome.error)

            if isinstance(outcome, ChatTurn):
                answer_text = outcome.content
                trace = [
                    {"source_kind": r.source_kind, "id": r.ref_id, "score": r.score}
                    for r in outcome.retrieval_trace
                ]
                outcome_kind = "answer"
                assistant_turn = outcome
            else:
                answer_text = outcome.describe()
                trace = []
                outcome_kind = (
                    "no_match" if isinstance(outcome, NoMatch) else "no_relevant_communities"
                )
                assistant_turn = ChatTurn(role="assistant", content=answer_text)

            session.append(ChatTurn(role="user", content=question))
            session.append(assistant_turn)
            state.sessions.put(session)
            state.usage.append(
                UsageEvent(
                    timestamp=utc_now(),
                    session_id=session.session_id,
                    mode=mode,
                    question=question,
                    answer=answer_text,
                    latency_ms=round(latency_ms, 3),
                    trace=trace,
                )
            )
        return {
            "session_id": session.session_id,
            "answer": answer_text,
            "trace": trace,
            "latency_ms": round(latency_ms, 3),
            "outcome": outcome_kind,
        }

    @app.get("/graph/summary")
    def graph_summary():
        es = state.engine_state
        if es is None or not es.built:
            return _error(503, "not_built", "engine artifacts not loaded")
        graph = es.engine.graph
        levels: dict[int, int] = {}
        for a in es.assignments:
            levels[a.level] = levels.get(a.level, 0) + 1
        return {
            "entities": len(graph.entities) if graph else 0,
            "relationships": len(graph.relationships) if graph else 0,
            "chunks": len(es.engine.chunk_index),
            "reports": len(es.engine.reports),
            "communities_per_level": {str(k): v for k, v in sorted(levels.items())},
        }

    @app.get("/graph/communities")
    def graph_communities(level: int = 0):
        es = state.engine_state
        if es is None or not es.built:
            return _error(503, "not_built", "engine artifacts not loaded")
        rows = [a for a in es.assignments if a.level == level]
        if not rows:
            return _error(404, "unknown_level", f"no communities at level {level}")
        return [
            {
                "community_id": a.community_id,
                "level": a.level,
                "parent_id": a.parent_id,
                "members": sorted(a.members),
            }
            for a in sorted(rows, key=lambda a: a.community_id)
        ]

    @app.get("/reports/{community_id}")
    def report(community_id: str):
        es = state.engine_state
        if es is None or not es.built:
            return _error(503, "not_built", "engine artifacts not loaded")
        for r in es.engine.reports:
            if r.community_id == community_id:
                return {
                    "community_id": r.community_id,
                    "level": r.level,
                    "title": r.title,
                    "summary": r.summary,
                    "rank": r.rank,
                    "member_entities": r.member_entities,
                }
        return _error(404, "unknown_community", f"no report for {community_id!r}")

    if reloader is not None:

        @app.post("/admin/reload")
        def admin_reload():
            try:
                new_state = reloader()
            except Exception as exc:  # rebuild errors must not kill the server
                return _error(500, "reload_failed", str(exc))
            state.swap_engine(new_state)
            return {"built": new_state.built}

    if state.debug:

        @app.get("/debug/prompts")
        def debug_prompts():
            es = state.engine_state
            if es is None:
                return {"prompts": []}
            prompts = getattr(es.engine.provider, "chat_prompts", None)
            return {"prompts": prompts() if callable(prompts) else []}

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
