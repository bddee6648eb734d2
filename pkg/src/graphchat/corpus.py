"""Corpus loading and sliding-window chunking.

Documents are read as strict UTF-8 so character offsets stay exact, and
every chunk carries its parent document id plus the half-open character
range it was cut from.
"""

from __future__ import annotations

import fnmatch
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import EmptyCorpus, InvalidChunkParams, MissingRoot, UnreadableFile

log = logging.getLogger(__name__)

KIND_DOCUMENTATION = "documentation"
KIND_PAPER = "paper"
KIND_CODE = "code"
KIND_QA_PAIRS = "qa_pairs"
KIND_ISSUES = "issues"

DOCUMENT_KINDS = (KIND_DOCUMENTATION, KIND_PAPER, KIND_CODE, KIND_QA_PAIRS, KIND_ISSUES)

# Patterns are matched against the posix-style doc_id (relative path).
DEFAULT_KIND_PATTERNS: dict[str, str] = {
    "codes.md": KIND_CODE,
    "*.py": KIND_CODE,
    "papers/*": KIND_PAPER,
    "qa/*": KIND_QA_PAIRS,
    "issues/*": KIND_ISSUES,
}

DEFAULT_CHUNK_SIZE = 1200
DEFAULT_CHUNK_OVERLAP = 100


@dataclass(frozen=True)
class SourceDocument:
    """One corpus file, identified by its relative path."""

    doc_id: str
    kind: str
    text: str

    @property
    def byte_len(self) -> int:
        return len(self.text.encode("utf-8"))


@dataclass(frozen=True)
class Chunk:
    """A contiguous character range of one document.

    ``chunk_id`` is ``"<doc_id>#<start>..<end>"`` over the half-open range
    ``[start, end)``; ``index`` is the ordinal of the chunk within its
    document.
    """

    chunk_id: str
    doc_id: str
    text: str
    start: int
    end: int
    index: int


def _kind_for(doc_id: str, patterns: dict[str, str]) -> str:
    for pattern, kind in patterns.items():
        if fnmatch.fnmatch(doc_id, pattern):
            return kind
    return KIND_DOCUMENTATION


def read_manifest(path: Path) -> list[str]:
    """Read a manifest file: one relative path per line, ``#`` comments allowed."""
    entries: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        entries.append(stripped)
    return entries


def load_corpus(
    root_dir: str | Path,
    manifest: list[str] | None = None,
    kind_patterns: dict[str, str] | None = None,
) -> list[SourceDocument]:
    """Load every corpus file under ``root_dir`` (or listed in ``manifest``).

    Returns documents sorted lexicographically by doc_id. Files that are
    empty or not valid UTF-8 raise :class:`UnreadableFile` naming the file
    rather than being silently skipped.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise MissingRoot(f"corpus root does not exist: {root}")
    patterns = kind_patterns if kind_patterns is not None else DEFAULT_KIND_PATTERNS

    if manifest is not None:
        rel_paths = list(manifest)
        for rel in rel_paths:
            if not (root / rel).is_file():
                raise UnreadableFile(rel, "listed in manifest but not a readable file")
    else:
        rel_paths = [
            p.relative_to(root).as_posix()
            for p in root.rglob("*")
            if p.is_file()
        ]

    docs: list[SourceDocument] = []
    for rel in sorted(rel_paths):
        path = root / rel
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise UnreadableFile(rel, str(exc)) from exc
        if not raw:
            raise UnreadableFile(rel, "file is empty")
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnreadableFile(rel, f"not valid UTF-8 ({exc})") from exc
        docs.append(SourceDocument(doc_id=rel, kind=_kind_for(rel, patterns), text=text))

    if not docs:
        raise EmptyCorpus(f"no documents under {root}")
    return docs


def chunk_document(doc: SourceDocument, size: int, overlap: int) -> list[Chunk]:
    """Split ``doc`` into chunks of ``size`` chars advancing by ``size - overlap``.

    Every chunk except the last has exactly ``size`` characters; the last
    ends exactly at the document end and is strictly longer than
    ``overlap``. Concatenating chunk 0 with each later chunk minus its
    first ``overlap`` characters reconstructs the document.
    """
    if size < 1 or overlap < 0 or size <= overlap:
        raise InvalidChunkParams(f"need size > overlap >= 0, got size={size} overlap={overlap}")
    text = doc.text
    length = len(text)
    stride = size - overlap

    chunks: list[Chunk] = []
    start = 0
    index = 0
    while start + size < length:
        chunks.append(_make_chunk(doc, start, start + size, index))
        start += stride
        index += 1
    chunks.append(_make_chunk(doc, start, length, index))
    return chunks


def _make_chunk(doc: SourceDocument, start: int, end: int, index: int) -> Chunk:
    return Chunk(
        chunk_id=f"{doc.doc_id}#{start}..{end}",
        doc_id=doc.doc_id,
        text=doc.text[start:end],
        start=start,
        end=end,
        index=index,
    )


def chunk_corpus(
    docs: list[SourceDocument], size: int = DEFAULT_CHUNK_SIZE, overlap: int = DEFAULT_CHUNK_OVERLAP
) -> list[Chunk]:
    """Chunk every document, preserving document order."""
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_document(doc, size, overlap))
    return out


def tag_code_corpus(
    docs: list[SourceDocument], patterns: list[str]
) -> list[SourceDocument]:
    """Return a copy of ``docs`` with kind=code for ids matching any pattern.

    Documents already tagged keep their kind unless a pattern matches; no
    match anywhere just yields an unchanged list.
    """
    if not patterns:
        raise ValueError("patterns must be non-empty")
    tagged: list[SourceDocument] = []
    hits = 0
    for doc in docs:
        if any(fnmatch.fnmatch(doc.doc_id, pat) for pat in patterns):
            tagged.append(replace(doc, kind=KIND_CODE))
            hits += 1
        else:
            tagged.append(doc)
    if hits == 0:
        log.warning("no documents matched code patterns %s", patterns)
    return tagged


def code_doc_ids(docs: list[SourceDocument]) -> set[str]:
    return {d.doc_id for d in docs if d.kind == KIND_CODE}
