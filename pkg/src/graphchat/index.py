"""Exact cosine-similarity index with CSV persistence.

Retrieval is a full linear scan over an immutable (id, text, vector)
store: corpora here stay small enough that exactness and testability
beat approximate structures.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Chunk
from .errors import (
    DimensionMismatch,
    EmptyIndex,
    InconsistentDimension,
    IndexIoError,
    MalformedRow,
    ZeroVector,
)
from .providers import Provider

log = logging.getLogger(__name__)

DEFAULT_TOP_K = 5
DEFAULT_THRESHOLD = 0.75
EMBED_BATCH_SIZE = 64

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IndexedItem:
    item_id: str
    text: str
    vector: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class SimilarityHit:
    item_id: str
    score: float


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two equal-dimension, nonzero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= NORM_TOLERANCE or nb <= NORM_TOLERANCE:
        raise ZeroVector("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


class EmbeddingIndex:
    """Immutable store of indexed items supporting exact top-k queries."""

    def __init__(self, items: Sequence[IndexedItem]):
        if items:
            dims = {item.vector.shape[0] for item in items}
            if len(dims) > 1:
                raise DimensionMismatch(f"mixed dimensions in index: {sorted(dims)}")
        self._items = list(items)
        self._ids = [item.item_id for item in self._items]
        self._texts = {item.item_id: item.text for item in self._items}
        if self._items:
            self._matrix = np.stack([item.vector for item in self._items]).astype(np.float64)
            self._norms = np.linalg.norm(self._matrix, axis=1)
        else:
            self._matrix = np.zeros((0, 0))
            self._norms = np.zeros(0)

    def __len__(self) -> int:
        return len(self._items)

    @property
    def dim(self) -> int:
        if not self._items:
            raise EmptyIndex("empty index has no dimension")
        return self._matrix.shape[1]

    def items(self) -> list[IndexedItem]:
        return list(self._items)

    def text_of(self, item_id: str) -> str:
        return self._texts[item_id]

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._texts

    def top_k(
        self,
        query_vector: np.ndarray,
        k: int = DEFAULT_TOP_K,
        threshold: float = DEFAULT_THRESHOLD,
    ) -> list[SimilarityHit]:
        """The k highest-cosine items scoring >= threshold.

        Results match a brute-force scan exactly: sorted by descending
        score, ties broken by ascending item_id.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._items:
            raise EmptyIndex("cannot query an empty index")
        q = np.asarray(query_vector, dtype=np.float64)
        if q.shape[0] != self.dim:
            raise DimensionMismatch(f"query dim {q.shape[0]} vs index dim {self.dim}")
        qn = float(np.linalg.norm(q))
        if qn <= NORM_TOLERANCE:
            raise ZeroVector("cannot query with a zero vector")
        zero_rows = self._norms <= NORM_TOLERANCE
        if zero_rows.any():
            raise ZeroVector(f"index contains zero-norm vectors: {int(zero_rows.sum())}")

        scores = (self._matrix @ q) / (self._norms * qn)
        hits = [
            SimilarityHit(item_id=self._ids[i], score=float(scores[i]))
            for i in range(len(self._ids))
            if scores[i] >= threshold
        ]
        hits.sort(key=lambda h: (-h.score, h.item_id))
        return hits[:k]


def build_index(
    inputs: Iterable[Chunk] | Iterable[tuple[str, str]],
    provider: Provider,
    batch_size: int = EMBED_BATCH_SIZE,
) -> EmbeddingIndex:
    """Embed chunks (or explicit (id, text) pairs) in deterministic batches."""
    pairs: list[tuple[str, str]] = []
    for entry in inputs:
        if isinstance(entry, Chunk):
            pairs.append((entry.chunk_id, entry.text))
        else:
            item_id, text = entry
            pairs.append((item_id, text))
    if not pairs:
        raise ValueError("cannot build an index from no inputs")

    items: list[IndexedItem] = []
    for i in range(0, len(pairs), batch_size):
        batch = pairs[i : i + batch_size]
        vectors = provider.embed_texts([text for _, text in batch])
        for (item_id, text), vector in zip(batch, vectors):
            items.append(IndexedItem(item_id=item_id, text=text, vector=vector))
    return EmbeddingIndex(items)


def save_csv(index: EmbeddingIndex, path: str | Path) -> None:
    """Write the index as ``item_id,text,dim,v0..v{d-1}`` (RFC-4180, LF).

    NUL characters are rejected up front: the csv reader cannot parse
    them back, which would silently break the round-trip guarantee.
    """
    items = index.items()
    if not items:
        raise EmptyIndex("refusing to save an empty index")
    for item in items:
        if "\x00" in item.item_id or "\x00" in item.text:
            raise IndexIoError(f"item {item.item_id!r} contains NUL; not representable in CSV")
    d = index.dim
    header = ["item_id", "text", "dim"] + [f"v{i}" for i in range(d)]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            # Text fields are always quoted so embedded \r cannot split a
            # row; floats go out bare via repr (shortest round-trip form).
            writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONNUMERIC)
            writer.writerow(header)
            for item in items:
                writer.writerow([item.item_id, item.text, d] + [float(x) for x in item.vector])
    except OSError as exc:
        raise IndexIoError(f"cannot write {path}: {exc}") from exc


def load_csv(path: str | Path) -> EmbeddingIndex:
    """Load an index written by :func:`save_csv`."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IndexIoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "missing header") from None
        if header[:3] != ["item_id", "text", "dim"]:
            raise MalformedRow(1, f"unexpected header {header[:3]}")
        d = len(header) - 3
        if d < 1:
            raise MalformedRow(1, "header declares no vector columns")

        items: list[IndexedItem] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise MalformedRow(line_no, f"only {len(row)} fields")
            item_id, text, dim_field = row[0], row[1], row[2]
            try:
                declared = int(dim_field)
            except ValueError:
                raise MalformedRow(line_no, f"bad dim field {dim_field!r}") from None
            coords = row[3:]
            if declared != d or len(coords) != d:
                raise InconsistentDimension(line_no, d, len(coords))
            try:
                vector = np.array([float(x) for x in coords], dtype=np.float64)
            except ValueError as exc:
                raise MalformedRow(line_no, f"non-numeric coordinate ({exc})") from None
            items.append(IndexedItem(item_id=item_id, text=text, vector=vector))

    if not items:
        raise MalformedRow(2, "no data rows")
    return EmbeddingIndex(items)
