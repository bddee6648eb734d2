"""Query answering: faq, rag, local and global modes over built artifacts.

The engine owns no mutable state beyond what it is constructed with; a
question plus a session history maps to either an assistant turn with a
retrieval trace or a typed outcome (NoMatch, NoRelevantCommunities,
ProviderFailure). Nothing returns silently empty.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence, Union
from uuid import uuid4

import numpy as np

from . import prompts
from .errors import EmptyIndex, GraphChatError
from .index import DEFAULT_THRESHOLD, DEFAULT_TOP_K, EmbeddingIndex, SimilarityHit
from .kg.graph import EntityGraph
from .kg.reports import CommunityReport
from .providers import Provider, user_request

log = logging.getLogger(__name__)

MODE_FAQ = "faq"
MODE_RAG = "rag"
MODE_LOCAL = "local"
MODE_GLOBAL = "global"
MODES = (MODE_FAQ, MODE_RAG, MODE_LOCAL, MODE_GLOBAL)

QUERY_CODE = "code"
QUERY_KNOWLEDGE = "knowledge"

DEFAULT_CODE_KEYWORDS = frozenset(
    {"code", "python", "import", "error", "traceback", "debug", "function", "script", "implement"}
)
_CODE_FRAGMENT_RE = re.compile(r"```|`[^`\n]+`|Traceback \(most recent call last\)")

DEFAULT_HISTORY_WINDOW = 5
DEFAULT_CONTEXT_BUDGET = 8000
DEFAULT_MAP_BATCH_SIZE = 10


@dataclass(frozen=True)
class TraceRef:
    source_kind: str  # chunk | entity | relationship | report | qa
    ref_id: str
    score: float


@dataclass
class ChatTurn:
    role: str
    content: str
    retrieval_trace: list[TraceRef] = field(default_factory=list)


@dataclass
class ChatSession:
    session_id: str = field(default_factory=lambda: uuid4().hex)
    turns: list[ChatTurn] = field(default_factory=list)
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    def append(self, turn: ChatTurn) -> None:
        non_system = [t for t in self.turns if t.role != "system"]
        if turn.role in ("user", "assistant"):
            if non_system and non_system[-1].role == turn.role:
                raise ValueError(f"two consecutive {turn.role} turns")
            if not non_system and turn.role == "assistant":
                raise ValueError("assistant turn cannot open a session")
        self.turns.append(turn)

    def history_text(self, window: int) -> str:
        """The last ``window`` non-system turns rendered for a prompt."""
        non_system = [t for t in self.turns if t.role != "system"]
        recent = non_system[-window:] if window > 0 else []
        lines = [f"{t.role.capitalize()}: {t.content}" for t in recent]
        return "\n".join(lines) if lines else "(none)"


@dataclass(frozen=True)
class Section:
    label: str
    text: str
    provenance: list[TraceRef]


@dataclass
class QueryContext:
    budget_chars: int
    sections: list[Section] = field(default_factory=list)

    def rendered(self) -> str:
        return "\n".join(f"[{s.label}] {s.text}" for s in self.sections)

    def trace(self) -> list[TraceRef]:
        out: list[TraceRef] = []
        for s in self.sections:
            out.extend(s.provenance)
        return out


@dataclass
class PartialAnswer:
    community_id: str
    text: str
    helpfulness: float


@dataclass
class NoMatch:
    question: str
    best_score: float | None
    threshold: float

    def describe(self) -> str:
        return "No stored answer is close enough to this question."


@dataclass
class NoRelevantCommunities:
    question: str

    def describe(self) -> str:
        return "No community report was rated relevant to this question."


@dataclass
class ProviderFailure:
    question: str
    error: str

    def describe(self) -> str:
        return f"The language-model provider failed: {self.error}"


Outcome = Union[ChatTurn, NoMatch, NoRelevantCommunities, ProviderFailure]


def classify_query(
    question: str, keywords: frozenset[str] = DEFAULT_CODE_KEYWORDS
) -> str:
    """``code`` when the question looks code-related, else ``knowledge``.

    Code intent means: a fenced or inline code fragment, a traceback
    marker, or any configured keyword as a standalone word.
    """
    if not question.strip():
        raise ValueError("question must be non-empty")
    if _CODE_FRAGMENT_RE.search(question):
        return QUERY_CODE
    words = set(re.findall(r"[a-z_]+", question.lower()))
    if words & keywords:
        return QUERY_CODE
    return QUERY_KNOWLEDGE


@dataclass
class QaStore:
    """Prepared question/answer pairs behind an embedding index."""

    index: EmbeddingIndex
    answers: dict[str, str]

    @staticmethod
    def build(pairs: Sequence[tuple[str, str, str]], provider: Provider) -> "QaStore":
        """``pairs`` are (qa_id, question_text, answer_text)."""
        from .index import build_index

        index = build_index([(qa_id, question) for qa_id, question, _ in pairs], provider)
        return QaStore(index=index, answers={qa_id: answer for qa_id, _, answer in pairs})


def faq_answer(
    question: str,
    qa: QaStore,
    provider: Provider,
    k: int = DEFAULT_TOP_K,
    threshold: float = DEFAULT_THRESHOLD,
) -> Outcome:
    """Return the stored answer of the closest prepared question.

    Retrieval only, no generation; below-threshold questions produce a
    NoMatch outcome.
    """
    if len(qa.index) == 0:
        raise EmptyIndex("faq mode requires a question index")
    qvec = provider.embed_texts([question])[0]
    hits = qa.index.top_k(qvec, k=k, threshold=threshold)
    if not hits:
        all_hits = qa.index.top_k(qvec, k=1, threshold=-1.0)
        best = all_hits[0].score if all_hits else None
        return NoMatch(question=question, best_score=best, threshold=threshold)
    best = hits[0]
    return ChatTurn(
        role="assistant",
        content=qa.answers[best.item_id],
        retrieval_trace=[TraceRef("qa", h.item_id, h.score) for h in hits],
    )


def pack_sections(sections: Sequence[Section], budget_chars: int) -> QueryContext:
    """Greedy packing in the given order, never exceeding the budget.

    A first section longer than the whole budget is truncated so the
    context is never empty; later over-budget sections are dropped.
    """
    ctx = QueryContext(budget_chars=budget_chars)
    used = 0
    for section in sections:
        separator = 1 if ctx.sections else 0
        header = len(section.label) + 3  # "[label] "
        need = separator + header + len(section.text)
        if used + need <= budget_chars:
            ctx.sections.append(section)
            used += need
        elif not ctx.sections:
            room = budget_chars - header
            if room <= 0:
                break
            ctx.sections.append(
                Section(section.label, section.text[:room], section.provenance)
            )
            break
    assert len(ctx.rendered()) <= budget_chars
    return ctx


@dataclass
class EngineConfig:
    top_k_entities: int = DEFAULT_TOP_K
    top_k_chunks: int = DEFAULT_TOP_K
    entity_threshold: float = DEFAULT_THRESHOLD
    chunk_threshold: float = DEFAULT_THRESHOLD
    faq_threshold: float = DEFAULT_THRESHOLD
    context_budget: int = DEFAULT_CONTEXT_BUDGET
    history_window: int = DEFAULT_HISTORY_WINDOW
    map_batch_size: int = DEFAULT_MAP_BATCH_SIZE
    code_keywords: frozenset[str] = DEFAULT_CODE_KEYWORDS
    temperature: float = 0.1


class Engine:
    """Built artifacts plus a provider, answering questions in four modes."""

    def __init__(
        self,
        provider: Provider,
        chunk_index: EmbeddingIndex,
        graph: EntityGraph | None = None,
        entity_index: EmbeddingIndex | None = None,
        reports: Sequence[CommunityReport] = (),
        qa_store: QaStore | None = None,
        code_chunk_index: EmbeddingIndex | None = None,
        config: EngineConfig | None = None,
        templates: prompts.TemplateSet | None = None,
    ):
        self.provider = provider
        self.chunk_index = chunk_index
        self.graph = graph
        self.entity_index = entity_index
        self.reports = list(reports)
        self.qa_store = qa_store
        self.code_chunk_index = code_chunk_index
        self.config = config or EngineConfig()
        self.templates = templates or prompts.default_templates()

    # -- context assembly ---------------------------------------------------

    def _entity_sections(self, qvec: np.ndarray) -> tuple[list[Section], list[str]]:
        if self.entity_index is None or self.graph is None or len(self.entity_index) == 0:
            return [], []
        hits = self.entity_index.top_k(
            qvec, k=self.config.top_k_entities, threshold=self.config.entity_threshold
        )
        sections = []
        matched = []
        for hit in hits:
            ent = self.graph.entities.get(hit.item_id)
            if ent is None:
                continue
            matched.append(ent.name)
            sections.append(
                Section(
                    "entity",
                    f"{ent.name} ({ent.entity_type}): {ent.description}",
                    [TraceRef("entity", ent.name, hit.score)],
                )
            )
        return sections, matched

    def _relationship_sections(self, matched: list[str]) -> list[Section]:
        if self.graph is None or not matched:
            return []
        matched_set = set(matched)
        rels = [
            rel
            for rel in self.graph.relationships.values()
            if rel.source in matched_set or rel.target in matched_set
        ]
        rels.sort(key=lambda r: (-r.weight, r.key))
        return [
            Section(
                "relationship",
                f"{rel.source} -> {rel.target}: {rel.description}",
                [TraceRef("relationship", f"{rel.source}|{rel.target}", rel.weight)],
            )
            for rel in rels
        ]

    def _report_sections(self, matched: list[str]) -> list[Section]:
        if not self.reports or not matched:
            return []
        matched_set = set(matched)
        relevant = [
            r for r in self.reports if matched_set & set(r.member_entities)
        ]
        relevant.sort(key=lambda r: (-r.rank, r.community_id))
        return [
            Section(
                "report",
                f"{r.title}: {r.summary}",
                [TraceRef("report", r.community_id, r.rank)],
            )
            for r in relevant
        ]

    def _chunk_sections(self, qvec: np.ndarray, index: EmbeddingIndex | None) -> list[Section]:
        if index is None or len(index) == 0:
            return []
        hits = index.top_k(
            qvec, k=self.config.top_k_chunks, threshold=self.config.chunk_threshold
        )
        return [
            Section("chunk", index.text_of(h.item_id), [TraceRef("chunk", h.item_id, h.score)])
            for h in hits
        ]

    def build_local_context(self, question: str) -> QueryContext:
        """Entities, their relationships, their reports, then chunks; packed
        in that order until the character budget is spent."""
        qvec = self.provider.embed_texts([question])[0]
        sections: list[Section] = []
        if self.graph is None or not self.graph.entities:
            log.warning("no graph available; local context degrades to chunks only")
            matched: list[str] = []
        else:
            entity_sections, matched = self._entity_sections(qvec)
            sections.extend(entity_sections)
            sections.extend(self._relationship_sections(matched))
            sections.extend(self._report_sections(matched))
        sections.extend(self._chunk_sections(qvec, self.chunk_index))
        if classify_query(question, self.config.code_keywords) == QUERY_CODE:
            sections.extend(self._chunk_sections(qvec, self.code_chunk_index))
        return pack_sections(sections, self.config.context_budget)

    def build_rag_context(self, question: str) -> QueryContext:
        qvec = self.provider.embed_texts([question])[0]
        sections = self._chunk_sections(qvec, self.chunk_index)
        if classify_query(question, self.config.code_keywords) == QUERY_CODE:
            sections.extend(self._chunk_sections(qvec, self.code_chunk_index))
        return pack_sections(sections, self.config.context_budget)

    # -- answer modes -------------------------------------------------------

    def _generate(self, question: str, session: ChatSession, context: QueryContext) -> Outcome:
        prompt = self.templates.render(
            "local_answer",
            history=session.history_text(self.config.history_window),
            context=context.rendered(),
            question=question,
        )
        try:
            reply = self.provider.complete_chat(
                user_request(prompt, temperature=self.config.temperature)
            )
        except GraphChatError as exc:
            return ProviderFailure(question=question, error=str(exc))
        return ChatTurn(role="assistant", content=reply, retrieval_trace=context.trace())

    def local_search(self, question: str, session: ChatSession) -> Outcome:
        return self._generate(question, session, self.build_local_context(question))

    def rag_search(self, question: str, session: ChatSession) -> Outcome:
        return self._generate(question, session, self.build_rag_context(question))

    def global_search(self, question: str) -> Outcome:
        """Map over level-0 reports in batches, reduce rated partials."""
        level0 = sorted(
            (r for r in self.reports if r.level == 0), key=lambda r: r.community_id
        )
        if not level0:
            return NoRelevantCommunities(question=question)
        partials: list[PartialAnswer] = []
        batch_size = self.config.map_batch_size
        try:
            for i in range(0, len(level0), batch_size):
                batch = level0[i : i + batch_size]
                partials.extend(self._map_batch(question, batch))
            kept = [p for p in partials if p.helpfulness > 0]
            if not kept:
                return NoRelevantCommunities(question=question)
            kept.sort(key=lambda p: (-p.helpfulness, p.community_id))
            lines = [
                f"[{p.community_id} | helpfulness {p.helpfulness:g}] {p.text}" for p in kept
            ]
            partial_block = "\n".join(lines)[: self.config.context_budget]
            reply = self.provider.complete_chat(
                user_request(
                    self.templates.render(
                        "global_reduce", question=question, partials=partial_block
                    ),
                    temperature=self.config.temperature,
                )
            )
        except GraphChatError as exc:
            return ProviderFailure(question=question, error=str(exc))
        return ChatTurn(
            role="assistant",
            content=reply,
            retrieval_trace=[
                TraceRef("report", p.community_id, p.helpfulness) for p in kept
            ],
        )

    def _map_batch(self, question: str, batch: list[CommunityReport]) -> list[PartialAnswer]:
        blocks = [
            f"### {r.community_id}\n{r.title}: {r.summary}" for r in batch
        ]
        prompt = self.templates.render(
            "global_map", question=question, reports="\n".join(blocks)
        )
        reply = self.provider.complete_chat(
            user_request(prompt, temperature=self.config.temperature)
        )
        return _parse_partials(reply, [r.community_id for r in batch])

    def answer(self, question: str, session: ChatSession, mode: str = MODE_LOCAL) -> Outcome:
        if not question.strip():
            raise ValueError("question must be non-empty")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode == MODE_FAQ:
            if self.qa_store is None:
                return NoMatch(question=question, best_score=None, threshold=self.config.faq_threshold)
            return faq_answer(
                question, self.qa_store, self.provider, threshold=self.config.faq_threshold
            )
        if mode == MODE_GLOBAL:
            return self.global_search(question)
        if mode == MODE_RAG:
            return self.rag_search(question, session)
        return self.local_search(question, session)


def _parse_partials(reply: str, community_ids: list[str]) -> list[PartialAnswer]:
    """Match the map reply to its batch; unparseable entries score 0."""
    by_id = {cid: PartialAnswer(cid, "", 0.0) for cid in community_ids}
    entries: list = []
    try:
        data = json.loads(reply)
        if isinstance(data, list):
            entries = data
    except json.JSONDecodeError:
        match = re.search(r"\[.*\]", reply, re.DOTALL)
        if match:
            try:
                parsed = json.loads(match.group(0))
                if isinstance(parsed, list):
                    entries = parsed
            except json.JSONDecodeError:
                pass
    for position, entry in enumerate(entries):
        if not isinstance(entry, dict):
            continue
        cid = entry.get("community_id")
        if cid not in by_id:
            cid = community_ids[position] if position < len(community_ids) else None
        if cid is None:
            continue
        try:
            score = float(entry.get("score", 0))
        except (TypeError, ValueError):
            score = 0.0
        by_id[cid] = PartialAnswer(
            community_id=cid,
            text=str(entry.get("answer", "")),
            helpfulness=min(100.0, max(0.0, score)),
        )
    return [by_id[cid] for cid in community_ids]
