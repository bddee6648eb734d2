"""Stable JSON persistence for graph build outputs.

Four artifacts with deterministic key order and sorted collections, so a
rebuild from the same inputs is byte-identical: entities.json,
relationships.json, communities.json, reports.json (plus manifest.json
recording seed, parameters, and template version).
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import GraphChatError
from .graph import Entity, EntityGraph, Relationship
from .leiden import CommunityAssignment, LeidenResult
from .reports import CommunityReport

ENTITIES_FILE = "entities.json"
RELATIONSHIPS_FILE = "relationships.json"
COMMUNITIES_FILE = "communities.json"
REPORTS_FILE = "reports.json"
MANIFEST_FILE = "manifest.json"


def _dump(path: Path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")


def export_graph(graph: EntityGraph, result: LeidenResult | None, out_dir: str | Path) -> list[Path]:
    """Write entities/relationships/communities JSON under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    entities = [
        {
            "name": ent.name,
            "entity_type": ent.entity_type,
            "description": ent.description,
            "source_chunk_ids": sorted(ent.source_chunk_ids),
            "mention_count": ent.mention_count,
        }
        for ent in (graph.entities[name] for name in sorted(graph.entities))
    ]
    relationships = [
        {
            "source": rel.source,
            "target": rel.target,
            "description": rel.description,
            "weight": rel.weight,
            "source_chunk_ids": sorted(rel.source_chunk_ids),
        }
        for rel in (graph.relationships[key] for key in sorted(graph.relationships))
    ]
    communities = []
    if result is not None:
        communities = [
            {
                "level": a.level,
                "community_id": a.community_id,
                "parent_id": a.parent_id,
                "members": sorted(a.members),
            }
            for a in sorted(result.assignments, key=lambda a: (a.level, a.community_id))
        ]

    paths = []
    for name, payload in (
        (ENTITIES_FILE, entities),
        (RELATIONSHIPS_FILE, relationships),
        (COMMUNITIES_FILE, communities),
    ):
        path = out / name
        _dump(path, payload)
        paths.append(path)
    return paths


def export_reports(reports: list[CommunityReport], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = [
        {
            "community_id": r.community_id,
            "level": r.level,
            "title": r.title,
            "summary": r.summary,
            "member_entities": r.member_entities,
            "member_relationships": [list(k) for k in r.member_relationships],
            "rank": r.rank,
        }
        for r in sorted(reports, key=lambda r: (r.level, r.community_id))
    ]
    path = out / REPORTS_FILE
    _dump(path, payload)
    return path


def export_manifest(out_dir: str | Path, manifest: dict) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / MANIFEST_FILE
    _dump(path, manifest)
    return path


def load_graph(out_dir: str | Path) -> EntityGraph:
    out = Path(out_dir)
    try:
        entities = json.loads((out / ENTITIES_FILE).read_text(encoding="utf-8"))
        relationships = json.loads((out / RELATIONSHIPS_FILE).read_text(encoding="utf-8"))
    except OSError as exc:
        raise GraphChatError(f"cannot load graph artifacts from {out}: {exc}") from exc
    graph = EntityGraph()
    for row in entities:
        graph.entities[row["name"]] = Entity(
            name=row["name"],
            entity_type=row["entity_type"],
            description=row["description"],
            source_chunk_ids=set(row["source_chunk_ids"]),
            mention_count=row["mention_count"],
        )
    for row in relationships:
        key = (row["source"], row["target"])
        graph.relationships[key] = Relationship(
            source=row["source"],
            target=row["target"],
            description=row["description"],
            weight=row["weight"],
            source_chunk_ids=set(row["source_chunk_ids"]),
        )
    graph.validate()
    return graph


def load_communities(out_dir: str | Path) -> list[CommunityAssignment]:
    rows = json.loads((Path(out_dir) / COMMUNITIES_FILE).read_text(encoding="utf-8"))
    return [
        CommunityAssignment(
            level=row["level"],
            community_id=row["community_id"],
            members=frozenset(row["members"]),
            parent_id=row.get("parent_id"),
        )
        for row in rows
    ]


def load_reports(out_dir: str | Path) -> list[CommunityReport]:
    rows = json.loads((Path(out_dir) / REPORTS_FILE).read_text(encoding="utf-8"))
    return [
        CommunityReport(
            community_id=row["community_id"],
            level=row["level"],
            title=row["title"],
            summary=row["summary"],
            member_entities=row["member_entities"],
            member_relationships=[tuple(k) for k in row["member_relationships"]],
            rank=row["rank"],
        )
        for row in rows
    ]


def load_manifest(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_FILE).read_text(encoding="utf-8"))
