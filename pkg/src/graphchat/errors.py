"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class GraphChatError(Exception):
    """Base class for every error raised by this package."""


# --- corpus ---


class MissingRoot(GraphChatError):
    """Corpus root directory does not exist."""


class UnreadableFile(GraphChatError):
    """A corpus file could not be read as non-empty UTF-8 text."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class EmptyCorpus(GraphChatError):
    """No documents found under the corpus root / manifest."""


class InvalidChunkParams(GraphChatError):
    """Chunk size/overlap combination violates size > overlap >= 0."""


# --- providers ---


class ProviderError(GraphChatError):
    """Remote provider returned a non-success response."""

    def __init__(self, status: int, body: str):
        super().__init__(f"provider returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class ProviderTimeout(GraphChatError):
    """Request to the provider timed out."""


class ExhaustedRetries(GraphChatError):
    """All retry attempts failed; carries the last underlying error."""

    def __init__(self, attempts: int, last_error: Exception):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


class DimensionMismatch(GraphChatError):
    """Vectors of differing dimension where equal dimension is required."""


# --- embedding index ---


class ZeroVector(GraphChatError):
    """Cosine similarity is undefined for a zero-norm vector."""


class EmptyIndex(GraphChatError):
    """Query against an index with no items."""


class IndexIoError(GraphChatError):
    """CSV persistence failed at the filesystem level."""


class MalformedRow(GraphChatError):
    """A CSV row could not be parsed into an indexed item."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InconsistentDimension(GraphChatError):
    """A CSV row's vector length disagrees with the declared dimension."""

    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(f"line {line_no}: expected {expected} coordinates, got {got}")
        self.line_no = line_no
        self.expected = expected
        self.got = got


# --- knowledge graph ---


class InvalidPartition(GraphChatError):
    """Partition does not cover every node exactly once."""


class EmptyGraph(GraphChatError):
    """Operation requires a graph with at least one entity."""


# --- benchmark ---


class SchemaError(GraphChatError):
    """A benchmark question violates the dataset schema."""

    def __init__(self, qid: str, reason: str):
        super().__init__(f"question {qid!r}: {reason}")
        self.qid = qid
        self.reason = reason


class DuplicateQid(GraphChatError):
    """Two benchmark questions share the same qid."""


class MismatchedQuestionSets(GraphChatError):
    """Analysis requires scorecards over the same question set."""


class LengthMismatch(GraphChatError):
    """Answer vectors of differing length cannot be correlated."""
