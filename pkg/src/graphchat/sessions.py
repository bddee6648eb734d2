"""Chat session persistence: an embedded sqlite store with idle expiry."""

from __future__ import annotations

import json
import sqlite3
import threading
import time
from pathlib import Path

from .engine import ChatSession, ChatTurn, TraceRef

DEFAULT_TTL_HOURS = 24.0

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL,
    last_active REAL NOT NULL,
    turns TEXT NOT NULL
)
"""


def _turns_to_json(turns: list[ChatTurn]) -> str:
    return json.dumps(
        [
            {
                "role": t.role,
                "content": t.content,
                "trace": [[r.source_kind, r.ref_id, r.score] for r in t.retrieval_trace],
            }
            for t in turns
        ],
        ensure_ascii=False,
    )


def _turns_from_json(blob: str) -> list[ChatTurn]:
    return [
        ChatTurn(
            role=row["role"],
            content=row["content"],
            retrieval_trace=[TraceRef(k, i, s) for k, i, s in row.get("trace", [])],
        )
        for row in json.loads(blob)
    ]


class SessionStore:
    """One sqlite file; safe for concurrent in-process use.

    ``lock_for`` hands out a per-session mutex so the service can
    serialize generations within a session while sessions stay
    independent of each other.
    """

    def __init__(self, path: str | Path, ttl_hours: float = DEFAULT_TTL_HOURS):
        self.path = str(path)
        self.ttl_seconds = ttl_hours * 3600.0
        self._db_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        with self._db_lock:
            self._conn.execute(_SCHEMA)
            self._conn.commit()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._db_lock:
            if session_id not in self._session_locks:
                self._session_locks[session_id] = threading.Lock()
            return self._session_locks[session_id]

    def get(self, session_id: str) -> ChatSession | None:
        with self._db_lock:
            row = self._conn.execute(
                "SELECT created_at, last_active, turns FROM sessions WHERE session_id = ?",
                (session_id,),
            ).fetchone()
        if row is None:
            return None
        created_at, last_active, turns_blob = row
        if time.time() - last_active > self.ttl_seconds:
            self.delete(session_id)
            return None
        session = ChatSession(session_id=session_id, created_at=created_at)
        session.turns = _turns_from_json(turns_blob)
        return session

    def put(self, session: ChatSession) -> None:
        with self._db_lock:
            self._conn.execute(
                "INSERT INTO sessions (session_id, created_at, last_active, turns) "
                "VALUES (?, ?, ?, ?) "
                "ON CONFLICT(session_id) DO UPDATE SET last_active = excluded.last_active, "
                "turns = excluded.turns",
                (session.session_id, session.created_at, time.time(), _turns_to_json(session.turns)),
            )
            self._conn.commit()

    def delete(self, session_id: str) -> None:
        with self._db_lock:
            self._conn.execute("DELETE FROM sessions WHERE session_id = ?", (session_id,))
            self._conn.commit()

    def expire_idle(self) -> int:
        cutoff = time.time() - self.ttl_seconds
        with self._db_lock:
            cur = self._conn.execute("DELETE FROM sessions WHERE last_active < ?", (cutoff,))
            self._conn.commit()
            return cur.rowcount

    def close(self) -> None:
        with self._db_lock:
            self._conn.close()
