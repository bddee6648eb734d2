"""LLM-driven entity/relationship extraction over chunks.

The provider is asked to emit delimited records:

    ("entity"|<NAME>|<TYPE>|<DESCRIPTION>)
    ("relationship"|<SOURCE>|<TARGET>|<DESCRIPTION>|<STRENGTH 1-10>)

separated by ``##`` and terminated by ``<|COMPLETE|>``. After the first
pass the extractor re-prompts for anything missed (gleaning) until the
provider answers NO to the continuation check or the round budget runs
out. Unparsable records are skipped with a warning, never fatal.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..corpus import Chunk
from ..providers import ChatMessage, CompletionRequest, Provider, user_request
from .. import prompts

log = logging.getLogger(__name__)

DEFAULT_MAX_GLEANINGS = 2

RECORD_DELIMITER = "##"
COMPLETION_MARKER = "<|COMPLETE|>"

_RECORD_RE = re.compile(r"\(\s*\"(entity|relationship)\"\s*\|(.*)\)\s*$", re.DOTALL)


@dataclass(frozen=True)
class RawEntity:
    name: str
    entity_type: str
    description: str
    chunk_id: str


@dataclass(frozen=True)
class RawRelationship:
    source: str
    target: str
    description: str
    strength: int
    chunk_id: str


def canonical_name(name: str) -> str:
    """Merge key for entity names: trim, collapse whitespace, upper-case."""
    return " ".join(name.split()).upper()


def parse_records(
    reply: str, chunk_id: str
) -> tuple[list[RawEntity], list[RawRelationship]]:
    """Parse one extraction reply into raw elements, skipping bad records."""
    entities: list[RawEntity] = []
    relationships: list[RawRelationship] = []
    body = reply.replace(COMPLETION_MARKER, "")
    for raw in body.split(RECORD_DELIMITER):
        record = raw.strip()
        if not record:
            continue
        match = _RECORD_RE.search(record)
        if not match:
            log.warning("unparsable extraction record skipped: %r", record[:120])
            continue
        kind = match.group(1)
        fields = [f.strip() for f in match.group(2).split("|")]
        if kind == "entity":
            if len(fields) != 3 or not fields[0]:
                log.warning("bad entity record skipped: %r", record[:120])
                continue
            name, entity_type, description = fields
            entities.append(
                RawEntity(
                    name=canonical_name(name),
                    entity_type=canonical_name(entity_type) or "UNKNOWN",
                    description=description,
                    chunk_id=chunk_id,
                )
            )
        else:
            if len(fields) != 4 or not fields[0] or not fields[1]:
                log.warning("bad relationship record skipped: %r", record[:120])
                continue
            source, target, description, strength_field = fields
            try:
                strength = int(strength_field)
            except ValueError:
                log.warning("non-integer strength skipped: %r", record[:120])
                continue
            strength = min(10, max(1, strength))
            source_c = canonical_name(source)
            target_c = canonical_name(target)
            if source_c == target_c:
                log.warning("self-relationship skipped: %r", record[:120])
                continue
            relationships.append(
                RawRelationship(
                    source=source_c,
                    target=target_c,
                    description=description,
                    strength=strength,
                    chunk_id=chunk_id,
                )
            )
    return entities, relationships


def extract_elements(
    chunk: Chunk,
    provider: Provider,
    max_gleanings: int = DEFAULT_MAX_GLEANINGS,
    templates: prompts.TemplateSet | None = None,
) -> tuple[list[RawEntity], list[RawRelationship]]:
    """Run the extraction conversation for one chunk.

    One initial extraction pass, then up to ``max_gleanings`` follow-up
    rounds; between rounds the provider is asked a YES/NO continuation
    question and extraction stops on anything that is not YES.
    """
    if not chunk.text:
        raise ValueError("chunk text must be non-empty")
    if max_gleanings < 0:
        raise ValueError("max_gleanings must be >= 0")
    tpl = templates or prompts.default_templates()

    history: list[ChatMessage] = [
        ChatMessage("user", tpl.render("extraction", chunk_text=chunk.text))
    ]
    reply = provider.complete_chat(CompletionRequest(messages=tuple(history)))
    entities, relationships = parse_records(reply, chunk.chunk_id)
    history.append(ChatMessage("assistant", reply))

    for _round in range(max_gleanings):
        history.append(ChatMessage("user", tpl.render("gleaning_check")))
        verdict = provider.complete_chat(CompletionRequest(messages=tuple(history)))
        history.append(ChatMessage("assistant", verdict or "NO"))
        if not verdict.strip().upper().startswith("YES"):
            break
        history.append(ChatMessage("user", tpl.render("gleaning_continue")))
        reply = provider.complete_chat(CompletionRequest(messages=tuple(history)))
        history.append(ChatMessage("assistant", reply or "(none)"))
        more_entities, more_relationships = parse_records(reply, chunk.chunk_id)
        entities.extend(more_entities)
        relationships.extend(more_relationships)

    return entities, relationships


def summarize_text(
    label: str,
    text: str,
    provider: Provider,
    templates: prompts.TemplateSet | None = None,
) -> str:
    """One LLM call condensing an over-budget element description."""
    tpl = templates or prompts.default_templates()
    return provider.complete_chat(
        user_request(tpl.render("element_summary", label=label, text=text))
    )
