"""Chat-completion and embedding providers.

Two implementations of the same small surface: an HTTP client speaking the
de-facto JSON chat-completions shape, and a scripted in-process mock whose
replies and embeddings are pure, seeded functions of the request. All
tests run against the mock; the HTTP client is what production config
points at.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx
import numpy as np

from .errors import (
    DimensionMismatch,
    ExhaustedRetries,
    ProviderError,
    ProviderTimeout,
)

log = logging.getLogger(__name__)

ROLE_SYSTEM = "system"
ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"

DEFAULT_TEMPERATURE = 0.1
DEFAULT_MAX_TOKENS = 1024
DEFAULT_CONCURRENCY = 4


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in (ROLE_SYSTEM, ROLE_USER, ROLE_ASSISTANT):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role != ROLE_SYSTEM and not self.content:
            raise ValueError(f"{self.role} message must have content")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    model_id: str = ""

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature must be in [0,1], got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


def user_request(
    prompt: str,
    system: str | None = None,
    temperature: float = DEFAULT_TEMPERATURE,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    model_id: str = "",
) -> CompletionRequest:
    """Build a single-turn request, optionally with a system preamble."""
    messages: list[ChatMessage] = []
    if system:
        messages.append(ChatMessage(ROLE_SYSTEM, system))
    messages.append(ChatMessage(ROLE_USER, prompt))
    return CompletionRequest(
        messages=tuple(messages),
        temperature=temperature,
        max_tokens=max_tokens,
        model_id=model_id,
    )


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "http://localhost:1234/v1"
    api_key: str | None = None
    chat_model_id: str = "codestral-22b"
    embed_model_id: str = "nomic-embed-text-v1.5"
    timeout: float = 60.0
    max_retries: int = 2
    max_concurrency: int = DEFAULT_CONCURRENCY
    trace_path: str | None = None

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


class Provider(Protocol):
    """Anything that can complete chats and embed texts."""

    def complete_chat(self, req: CompletionRequest) -> str: ...

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def request_fingerprint(req: CompletionRequest) -> str:
    """Stable content hash of a completion request (used as mock script key)."""
    payload = {
        "model": req.model_id,
        "temperature": req.temperature,
        "messages": [[m.role, m.content] for m in req.messages],
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _check_embeddings(vectors: list[np.ndarray]) -> list[np.ndarray]:
    dims = {v.shape[0] for v in vectors}
    if len(dims) > 1:
        raise DimensionMismatch(f"ragged embedding dimensions: {sorted(dims)}")
    return vectors


class _TraceWriter:
    """Optional JSON-lines log of every prompt/reply pair."""

    def __init__(self, path: str | None):
        self._path = Path(path) if path else None
        self._lock = threading.Lock()

    def record(self, kind: str, payload: dict) -> None:
        if self._path is None:
            return
        line = json.dumps({"kind": kind, **payload}, ensure_ascii=False)
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class HttpProvider:
    """JSON-over-HTTP chat and embedding client with bounded retries.

    Transient failures (timeouts, connection errors, HTTP 429/5xx) are
    retried up to ``max_retries`` times with exponential backoff
    (0.5s * 2^attempt, +/-20% jitter); other HTTP errors surface
    immediately as :class:`ProviderError`.
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        client: httpx.Client | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.cfg = cfg
        api_key = cfg.api_key or os.environ.get("GRAPHCHAT_API_KEY")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = client or httpx.Client(
            base_url=cfg.base_url, headers=headers, timeout=cfg.timeout
        )
        self._sleep = sleeper
        self._slots = threading.Semaphore(cfg.max_concurrency)
        self._trace = _TraceWriter(cfg.trace_path)
        self._backoff_rng = random.Random()

    def _post_with_retries(self, path: str, payload: dict) -> dict:
        attempts = self.cfg.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                with self._slots:
                    resp = self._client.post(path, json=payload)
            except httpx.TimeoutException as exc:
                last_error = ProviderTimeout(str(exc))
            except httpx.HTTPError as exc:
                last_error = ProviderError(0, str(exc))
            else:
                if resp.status_code == 200:
                    return resp.json()
                err = ProviderError(resp.status_code, resp.text)
                if resp.status_code not in (429,) and resp.status_code < 500:
                    raise err
                last_error = err
            if attempt + 1 < attempts:
                delay = 0.5 * (2**attempt)
                delay *= 1.0 + self._backoff_rng.uniform(-0.2, 0.2)
                log.debug("retrying %s after %.2fs (%s)", path, delay, last_error)
                self._sleep(delay)
        raise ExhaustedRetries(attempts, last_error)  # type: ignore[arg-type]

    def complete_chat(self, req: CompletionRequest) -> str:
        payload = {
            "model": req.model_id or self.cfg.chat_model_id,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
        }
        data = self._post_with_retries("/chat/completions", payload)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(200, f"malformed completion body: {data!r}") from exc
        self._trace.record("chat", {"request": payload, "reply": text})
        return text

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("texts must be non-empty")
        for t in texts:
            if not t:
                raise ValueError("cannot embed an empty text")
        payload = {"model": self.cfg.embed_model_id, "input": list(texts)}
        data = self._post_with_retries("/embeddings", payload)
        try:
            rows = sorted(data["data"], key=lambda d: d["index"])
            vectors = [np.asarray(row["embedding"], dtype=np.float64) for row in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderError(200, f"malformed embedding body: {data!r}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(200, f"expected {len(texts)} embeddings, got {len(vectors)}")
        self._trace.record("embed", {"count": len(texts)})
        return _check_embeddings(vectors)

    def ping(self) -> bool:
        try:
            self._client.get("/models")
            return True
        except httpx.HTTPError:
            return False


_TOKEN_RE = re.compile(r"[a-z0-9_]+")


def _token_vector(seed: int, token: str, dim: int) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}:{token}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    return rng.standard_normal(dim)


@dataclass
class ScriptedProvider:
    """Deterministic provider for tests and offline runs.

    Chat replies are a pure function of the request: exact fingerprint
    matches win, then substring rules (first rule whose pattern occurs in
    the last message), then the ``responder`` callable over the full
    joined prompt, then ``default_reply``. Embeddings are a seeded
    bag-of-tokens hash projection: texts sharing words land near each
    other, identical texts coincide exactly.
    """

    script: dict[str, str] = field(default_factory=dict)
    rules: list[tuple[str, str]] = field(default_factory=list)
    responder: Callable[[str], str | None] | None = None
    default_reply: str = ""
    dim: int = 64
    seed: int = 0
    call_log: list[dict] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _reply_for(self, req: CompletionRequest) -> str:
        fp = request_fingerprint(req)
        if fp in self.script:
            return self.script[fp]
        last = req.messages[-1].content
        for pattern, reply in self.rules:
            if pattern in last:
                return reply
        if self.responder is not None:
            out = self.responder("\n".join(m.content for m in req.messages))
            if out is not None:
                return out
        return self.default_reply

    def complete_chat(self, req: CompletionRequest) -> str:
        reply = self._reply_for(req)
        with self._lock:
            self.call_log.append(
                {
                    "kind": "chat",
                    "prompt": "\n".join(m.content for m in req.messages),
                    "messages": [(m.role, m.content) for m in req.messages],
                    "reply": reply,
                }
            )
        return reply

    def embed_one(self, text: str) -> np.ndarray:
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            tokens = [text]
        acc = np.zeros(self.dim, dtype=np.float64)
        for token in tokens:
            acc += _token_vector(self.seed, token, self.dim)
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            acc = _token_vector(self.seed, "\x00" + text, self.dim)
            norm = float(np.linalg.norm(acc))
        return acc / norm

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("texts must be non-empty")
        for t in texts:
            if not t:
                raise ValueError("cannot embed an empty text")
        with self._lock:
            self.call_log.append({"kind": "embed", "texts": list(texts)})
        return _check_embeddings([self.embed_one(t) for t in texts])

    def ping(self) -> bool:
        return True

    def chat_prompts(self) -> list[str]:
        """Every chat prompt seen so far, in call order."""
        with self._lock:
            return [c["prompt"] for c in self.call_log if c["kind"] == "chat"]


def scripted_mock(
    script: dict[str, str] | None = None,
    default_reply: str = "",
    dim: int = 64,
    seed: int = 0,
    rules: list[tuple[str, str]] | None = None,
    responder: Callable[[str], str | None] | None = None,
) -> ScriptedProvider:
    """Build a :class:`ScriptedProvider` (fingerprint script plus rule list)."""
    return ScriptedProvider(
        script=dict(script or {}),
        rules=list(rules or []),
        responder=responder,
        default_reply=default_reply,
        dim=dim,
        seed=seed,
    )


def load_mock_script(path: str | Path) -> ScriptedProvider:
    """Load a mock provider spec from JSON.

    Schema: ``{"default_reply": str, "dim": int, "seed": int,
    "rules": [[substring, reply], ...], "script": {fingerprint: reply}}``.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ScriptedProvider(
        script=dict(data.get("script", {})),
        rules=[tuple(r) for r in data.get("rules", [])],
        default_reply=data.get("default_reply", ""),
        dim=int(data.get("dim", 64)),
        seed=int(data.get("seed", 0)),
    )
