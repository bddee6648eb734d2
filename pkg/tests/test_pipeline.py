"""End-to-end build over the fixture corpus with the scripted mock."""

from __future__ import annotations

import json

from graphchat.build import BuildParams, build_graph, ingest, load_engine
from graphchat.engine import ChatSession, ChatTurn, EngineConfig
from graphchat.kg.artifacts import load_graph, load_manifest

from .conftest import make_pipeline_provider

ARTIFACTS = ("entities.json", "relationships.json", "communities.json", "reports.json")


def run_build(corpus, out):
    provider = make_pipeline_provider()
    params = BuildParams(chunk_size=1200, overlap=100, seed=0)
    ingest(corpus, out, provider, params)
    build_graph(out, provider, params)
    return provider


class TestGoldenSnapshot:
    def test_artifacts_byte_identical_across_runs(self, tmp_path, fixture_corpus):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_build(fixture_corpus, out_a)
        run_build(fixture_corpus, out_b)
        for name in ARTIFACTS + ("chunks.csv", "code_chunks.csv", "entities.csv", "manifest.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_expected_graph_content(self, built_dir):
        graph = load_graph(built_dir)
        assert set(graph.entities) == {"STREAMLIB", "PIPELINE", "WINDOW"}
        assert set(graph.relationships) == {("PIPELINE", "STREAMLIB"), ("PIPELINE", "WINDOW")}
        # strengths 8 + 3 summed across chunks
        assert graph.relationships[("PIPELINE", "STREAMLIB")].weight == 11.0
        assert graph.entities["STREAMLIB"].mention_count == 2

    def test_manifest_records_build(self, built_dir):
        manifest = load_manifest(built_dir)
        assert manifest["graph"]["seed"] == 0
        assert manifest["graph"]["entities"] == 3
        assert manifest["corpus"]["chunks"] == 3
        assert manifest["graph"]["template_version"]

    def test_local_search_cites_expected_ids(self, built_dir):
        question = "tell me how a streamlib pipeline connects sources to sinks"
        provider = make_pipeline_provider(
            extra_rules=[(question, "local answer about pipelines")]
        )
        engine, _ = load_engine(
            built_dir, provider, EngineConfig(entity_threshold=0.05, chunk_threshold=0.05)
        )
        outcome = engine.answer(question, ChatSession(), mode="local")
        assert isinstance(outcome, ChatTurn)
        entity_ids = {r.ref_id for r in outcome.retrieval_trace if r.source_kind == "entity"}
        chunk_ids = {r.ref_id for r in outcome.retrieval_trace if r.source_kind == "chunk"}
        assert {"STREAMLIB", "PIPELINE"} <= entity_ids
        assert any(cid.startswith("overview.md#") for cid in chunk_ids)

    def test_reports_levels_default(self, built_dir):
        reports = json.loads((built_dir / "reports.json").read_text(encoding="utf-8"))
        assert reports
        assert {r["level"] for r in reports} <= {0, 1}
