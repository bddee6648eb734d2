"""Append-only JSON-lines usage log with crash recovery.

One event per assistant turn. A crash mid-write can leave at most one
truncated final line; recovery moves any undecodable line into a
``.quarantine`` sidecar and rewrites the log to the valid prefix, so the
main file always contains exactly the decodable history.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

log = logging.getLogger(__name__)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class UsageEvent:
    timestamp: str
    session_id: str
    mode: str
    question: str
    answer: str
    latency_ms: float
    trace: list = field(default_factory=list)


class UsageLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.quarantined = self.recover()

    def recover(self) -> int:
        """Drop undecodable lines into the quarantine sidecar; return count."""
        if not self.path.exists():
            return 0
        good: list[str] = []
        bad: list[str] = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                json.loads(line)
                good.append(line)
            except json.JSONDecodeError:
                bad.append(line)
        if bad:
            quarantine = self.path.with_suffix(self.path.suffix + ".quarantine")
            with open(quarantine, "a", encoding="utf-8") as fh:
                for line in bad:
                    fh.write(line + "\n")
            body = "\n".join(good) + ("\n" if good else "")
            self.path.write_text(body, encoding="utf-8")
            log.warning("quarantined %d corrupt usage-log line(s) to %s", len(bad), quarantine)
        return len(bad)

    def append(self, event: UsageEvent) -> None:
        line = json.dumps(asdict(event), ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def events(self) -> list[UsageEvent]:
        if not self.path.exists():
            return []
        out: list[UsageEvent] = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            out.append(UsageEvent(**row))
        return out
