"""Community report generation: one LLM summary per community per level."""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass

from ..errors import GraphChatError
from ..providers import Provider, user_request
from .. import prompts
from .graph import EntityGraph
from .leiden import LeidenResult

log = logging.getLogger(__name__)

DEFAULT_REPORT_LEVELS = (0, 1)
DEFAULT_REPORT_BUDGET = 6000

_RATING_RE = re.compile(r"rating\D{0,4}(\d+(?:\.\d+)?)", re.IGNORECASE)


@dataclass
class CommunityReport:
    community_id: str
    level: int
    title: str
    summary: str
    member_entities: list[str]
    member_relationships: list[tuple[str, str]]
    rank: float


def _render_members(
    graph: EntityGraph, members: frozenset[str], budget: int
) -> tuple[str, str, list[tuple[str, str]]]:
    """Entity and relationship blocks, relationships strongest-first,
    trimmed to roughly ``budget`` characters."""
    entity_lines = [
        f"- {name} ({graph.entities[name].entity_type}): {graph.entities[name].description}"
        for name in sorted(members)
        if name in graph.entities
    ]
    rels = [
        rel
        for rel in graph.relationships.values()
        if rel.source in members and rel.target in members
    ]
    rels.sort(key=lambda r: (-r.weight, r.key))
    rel_lines = [
        f"- {rel.source} -> {rel.target} (weight {rel.weight:g}): {rel.description}"
        for rel in rels
    ]

    used = 0
    kept_entities: list[str] = []
    for line in entity_lines:
        if used + len(line) > budget // 2 and kept_entities:
            break
        kept_entities.append(line)
        used += len(line) + 1
    kept_rels: list[str] = []
    kept_rel_keys: list[tuple[str, str]] = []
    for line, rel in zip(rel_lines, rels):
        if used + len(line) > budget and kept_rels:
            break
        kept_rels.append(line)
        kept_rel_keys.append(rel.key)
        used += len(line) + 1

    return "\n".join(kept_entities), "\n".join(kept_rels), kept_rel_keys


def _parse_report_reply(reply: str, fallback_title: str, member_count: int) -> tuple[str, str, float]:
    title = fallback_title
    summary = reply.strip()
    rank = math.log1p(member_count)
    try:
        data = json.loads(reply)
        if isinstance(data, dict):
            title = str(data.get("title", title)) or title
            summary = str(data.get("summary", summary)) or summary
            if "rating" in data:
                rank = float(data["rating"])
    except (json.JSONDecodeError, TypeError, ValueError):
        match = _RATING_RE.search(reply)
        if match:
            try:
                rank = float(match.group(1))
            except ValueError:
                pass
    return title, summary, min(10.0, max(0.0, rank))


def summarize_communities(
    graph: EntityGraph,
    result: LeidenResult,
    provider: Provider,
    levels_to_report: tuple[int, ...] = DEFAULT_REPORT_LEVELS,
    budget: int = DEFAULT_REPORT_BUDGET,
    templates: prompts.TemplateSet | None = None,
) -> list[CommunityReport]:
    """Generate a report for each community at the requested levels.

    A provider failure on one community is logged and skipped; the rest
    still get reports.
    """
    tpl = templates or prompts.default_templates()
    available = set(result.levels())
    reports: list[CommunityReport] = []
    for level in sorted(set(levels_to_report) & available):
        for assignment in sorted(result.at_level(level), key=lambda a: a.community_id):
            entity_block, rel_block, rel_keys = _render_members(
                graph, assignment.members, budget
            )
            prompt = tpl.render(
                "community_report", entities=entity_block, relationships=rel_block
            )
            try:
                reply = provider.complete_chat(user_request(prompt))
            except GraphChatError as exc:
                log.error("report failed for %s: %s", assignment.community_id, exc)
                continue
            title, summary, rank = _parse_report_reply(
                reply, f"Community {assignment.community_id}", len(assignment.members)
            )
            if not summary:
                summary = f"(empty report for {assignment.community_id})"
            reports.append(
                CommunityReport(
                    community_id=assignment.community_id,
                    level=level,
                    title=title,
                    summary=summary,
                    member_entities=sorted(assignment.members),
                    member_relationships=rel_keys,
                    rank=rank,
                )
            )
    return reports
