"""Extraction record parsing and gleaning rounds."""

from __future__ import annotations

import pytest

from graphchat.corpus import Chunk
from graphchat.kg.extraction import extract_elements, parse_records
from graphchat.providers import scripted_mock


def chunk(text: str = "some documentation text") -> Chunk:
    return Chunk(
        chunk_id="doc.md#0..23", doc_id="doc.md", text=text, start=0, end=len(text), index=0
    )


class TestParseRecords:
    def test_single_entity(self):
        ents, rels = parse_records(
            '("entity"|RESERVOIRPY|LIBRARY|a python library)##<|COMPLETE|>', "c1"
        )
        assert len(ents) == 1 and not rels
        assert ents[0].name == "RESERVOIRPY"
        assert ents[0].entity_type == "LIBRARY"
        assert ents[0].description == "a python library"
        assert ents[0].chunk_id == "c1"

    def test_single_relationship(self):
        ents, rels = parse_records(
            '("relationship"|RESERVOIRPY|RESERVOIR COMPUTING|implements|8)##<|COMPLETE|>',
            "c1",
        )
        assert not ents and len(rels) == 1
        assert rels[0].source == "RESERVOIRPY"
        assert rels[0].target == "RESERVOIR COMPUTING"
        assert rels[0].strength == 8

    def test_multiple_records(self):
        reply = (
            '("entity"|A|CONCEPT|first)##'
            '("entity"|B|CONCEPT|second)##'
            '("relationship"|A|B|links|5)##<|COMPLETE|>'
        )
        ents, rels = parse_records(reply, "c")
        assert [e.name for e in ents] == ["A", "B"]
        assert rels[0].strength == 5

    def test_unparsable_record_skipped(self, caplog):
        reply = 'garbage##("entity"|GOOD|TYPE|kept)##<|COMPLETE|>'
        with caplog.at_level("WARNING"):
            ents, rels = parse_records(reply, "c")
        assert [e.name for e in ents] == ["GOOD"]
        assert any("unparsable" in r.message for r in caplog.records)

    def test_bad_strength_skipped(self):
        ents, rels = parse_records('("relationship"|A|B|x|strong)##<|COMPLETE|>', "c")
        assert not rels

    def test_strength_clamped_to_scale(self):
        _, rels = parse_records('("relationship"|A|B|x|99)', "c")
        assert rels[0].strength == 10

    def test_self_relationship_dropped(self):
        _, rels = parse_records('("relationship"|A|a|self|3)', "c")
        assert not rels

    def test_names_canonicalized(self):
        ents, _ = parse_records('("entity"|  spaced   name |type|d)', "c")
        assert ents[0].name == "SPACED NAME"


class TestGleaning:
    def test_no_gleaning_when_check_says_no(self):
        provider = scripted_mock(
            rules=[
                ("Answer with exactly YES or NO", "NO"),
                ("Text:", '("entity"|ONE|T|first)##<|COMPLETE|>'),
            ]
        )
        ents, _ = extract_elements(chunk(), provider, max_gleanings=2)
        assert [e.name for e in ents] == ["ONE"]
        # initial extraction + one check
        assert len(provider.chat_prompts()) == 2

    def test_two_rounds_then_no(self):
        # Round-dependent replies need state, so use a responder instead of
        # the static rule table.
        checks = iter(["YES", "YES", "NO"])
        gleans = iter(
            [
                '("entity"|TWO|T|second)##<|COMPLETE|>',
                '("entity"|THREE|T|third)##<|COMPLETE|>',
            ]
        )

        def responder(full_prompt: str) -> str | None:
            last_line = full_prompt.rsplit("\n\n", 1)[-1]
            if "Answer with exactly YES or NO" in last_line:
                return next(checks)
            if "Do not repeat records" in last_line:
                return next(gleans)
            if "Text:" in full_prompt:
                return '("entity"|ONE|T|first)##<|COMPLETE|>'
            return None

        provider = scripted_mock(responder=responder)
        ents, _ = extract_elements(chunk(), provider, max_gleanings=3)
        assert [e.name for e in ents] == ["ONE", "TWO", "THREE"]

    def test_rounds_exhausted(self):
        def responder(full_prompt: str) -> str | None:
            last_line = full_prompt.rsplit("\n\n", 1)[-1]
            if "Answer with exactly YES or NO" in last_line:
                return "YES"
            if "Do not repeat records" in last_line:
                return '("entity"|MORE|T|again)##<|COMPLETE|>'
            return '("entity"|BASE|T|base)##<|COMPLETE|>'

        provider = scripted_mock(responder=responder)
        ents, _ = extract_elements(chunk(), provider, max_gleanings=2)
        assert [e.name for e in ents] == ["BASE", "MORE", "MORE"]

    def test_zero_gleanings_never_asks(self):
        provider = scripted_mock(
            rules=[("Text:", '("entity"|ONLY|T|solo)##<|COMPLETE|>')],
            default_reply="SHOULD NOT HAPPEN",
        )
        ents, _ = extract_elements(chunk(), provider, max_gleanings=0)
        assert [e.name for e in ents] == ["ONLY"]
        assert len(provider.chat_prompts()) == 1

    def test_rejects_empty_chunk(self):
        with pytest.raises(ValueError):
            extract_elements(chunk(""), scripted_mock())
