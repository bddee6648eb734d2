"""Entity graph: merged extraction elements as weighted undirected edges."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from ..providers import Provider
from .. import prompts
from .extraction import RawEntity, RawRelationship, summarize_text
from .leiden import WeightedGraph

log = logging.getLogger(__name__)

DEFAULT_SUMMARY_BUDGET = 1500

_DESCRIPTION_SEP = "\n"


@dataclass
class Entity:
    name: str
    entity_type: str
    description: str
    source_chunk_ids: set[str] = field(default_factory=set)
    mention_count: int = 0


@dataclass
class Relationship:
    """Undirected edge; (source, target) stored lexicographically ordered."""

    source: str
    target: str
    description: str
    weight: float
    source_chunk_ids: set[str] = field(default_factory=set)

    @property
    def key(self) -> tuple[str, str]:
        return (self.source, self.target)


@dataclass
class EntityGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    relationships: dict[tuple[str, str], Relationship] = field(default_factory=dict)

    def neighbors(self, name: str) -> list[Relationship]:
        return [r for r in self.relationships.values() if name in r.key]

    def to_weighted(self) -> WeightedGraph:
        return WeightedGraph.build(
            self.entities.keys(),
            {key: rel.weight for key, rel in self.relationships.items()},
        )

    def validate(self) -> None:
        for (u, v), rel in self.relationships.items():
            if u >= v:
                raise ValueError(f"relationship key not ordered: {(u, v)}")
            if u not in self.entities or v not in self.entities:
                raise ValueError(f"dangling endpoint in {(u, v)}")
            if rel.weight <= 0:
                raise ValueError(f"non-positive weight on {(u, v)}")
        for name, ent in self.entities.items():
            if ent.mention_count < 1 or not ent.source_chunk_ids:
                raise ValueError(f"entity {name!r} has no provenance")


def _merged_description(parts: list[str]) -> str:
    unique: list[str] = []
    seen: set[str] = set()
    for part in parts:
        cleaned = part.strip()
        if cleaned and cleaned not in seen:
            unique.append(cleaned)
            seen.add(cleaned)
    return _DESCRIPTION_SEP.join(unique)


def merge_elements(
    raw_entities: list[RawEntity],
    raw_relationships: list[RawRelationship],
    provider: Provider | None = None,
    summary_char_budget: int = DEFAULT_SUMMARY_BUDGET,
    templates: prompts.TemplateSet | None = None,
) -> EntityGraph:
    """Merge per-chunk raw elements into a consistent graph.

    Entities merge by canonical name; duplicate relationships sum their
    strengths into the edge weight. Descriptions that exceed the char
    budget are condensed with a single summarize call (skipped when no
    provider is given). Relationship endpoints with no extracted entity
    get a stub entity so the graph invariants hold.
    """
    graph = EntityGraph()

    by_name: dict[str, list[RawEntity]] = {}
    for raw in raw_entities:
        by_name.setdefault(raw.name, []).append(raw)

    for name in sorted(by_name):
        mentions = by_name[name]
        type_counts = Counter(m.entity_type for m in mentions)
        # Most frequent type wins; ties resolved lexicographically.
        entity_type = min(
            type_counts, key=lambda t: (-type_counts[t], t)
        )
        description = _merged_description([m.description for m in mentions])
        if provider is not None and len(description) > summary_char_budget:
            description = summarize_text(name, description, provider, templates)
        graph.entities[name] = Entity(
            name=name,
            entity_type=entity_type,
            description=description,
            source_chunk_ids={m.chunk_id for m in mentions},
            mention_count=len(mentions),
        )

    grouped: dict[tuple[str, str], list[RawRelationship]] = {}
    for raw in raw_relationships:
        key = tuple(sorted((raw.source, raw.target)))
        grouped.setdefault(key, []).append(raw)  # type: ignore[arg-type]

    for key in sorted(grouped):
        instances = grouped[key]
        source, target = key
        for endpoint in key:
            if endpoint not in graph.entities:
                log.warning("stub entity created for dangling endpoint %r", endpoint)
                graph.entities[endpoint] = Entity(
                    name=endpoint,
                    entity_type="UNKNOWN",
                    description=_merged_description([i.description for i in instances]),
                    source_chunk_ids={i.chunk_id for i in instances},
                    mention_count=1,
                )
        description = _merged_description([i.description for i in instances])
        if provider is not None and len(description) > summary_char_budget:
            description = summarize_text(f"{source} -- {target}", description, provider, templates)
        graph.relationships[key] = Relationship(
            source=source,
            target=target,
            description=description,
            weight=float(sum(i.strength for i in instances)),
            source_chunk_ids={i.chunk_id for i in instances},
        )

    graph.validate()
    return graph
