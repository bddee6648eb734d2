"""Shared fixtures: a tiny documentation corpus and a fully scripted provider."""

from __future__ import annotations

import pytest

from graphchat.build import BuildParams, build_graph, ingest
from graphchat.providers import scripted_mock

OVERVIEW_MD = (
    "Streamlib is a Python library for dataflow pipelines. "
    "A pipeline connects sources to sinks and can be replayed deterministically. "
    "Streamlib provides windowing so events can be grouped by time."
)

API_MD = (
    "The Pipeline class builds dataflow graphs from stages. "
    "Use Window to group events before aggregation. "
    "Pipeline.run executes the whole dataflow and returns a result handle."
)

CODES_MD = (
    "# Examples\n"
    "\n"
    "```python\n"
    "from streamlib import Pipeline\n"
    "pipe = Pipeline()\n"
    "pipe.run()\n"
    "```\n"
    "Use Pipeline for dataflow jobs.\n"
)

ENTITY_RECORDS_OVERVIEW = (
    '("entity"|STREAMLIB|LIBRARY|A Python library for dataflow pipelines)##'
    '("entity"|PIPELINE|CONCEPT|Connects sources to sinks)##'
    '("relationship"|STREAMLIB|PIPELINE|Streamlib provides pipelines|8)##'
    "<|COMPLETE|>"
)

ENTITY_RECORDS_API = (
    '("entity"|PIPELINE|CLASS|Builds dataflow graphs from stages)##'
    '("entity"|WINDOW|CLASS|Groups events before aggregation)##'
    '("relationship"|PIPELINE|WINDOW|Pipelines group events with windows|6)##'
    "<|COMPLETE|>"
)

ENTITY_RECORDS_CODES = (
    '("entity"|STREAMLIB|LIBRARY|Importable Python package)##'
    '("relationship"|STREAMLIB|PIPELINE|Examples import Pipeline from streamlib|3)##'
    "<|COMPLETE|>"
)

REPORT_REPLY = (
    '{"title": "Dataflow core", '
    '"summary": "STREAMLIB, PIPELINE and WINDOW form the dataflow core of the corpus.", '
    '"rating": 7}'
)

# Order matters: later-stage prompts first so chunk text quoted inside a
# context section can never hijack a reply.
PIPELINE_RULES = [
    ("Answer with exactly YES or NO", "NO"),
    ("Do not repeat records already given", "<|COMPLETE|>"),
    ("Condense the following notes", "condensed description"),
    ("analyst report about one cluster", REPORT_REPLY),
    ("rating how useful each community report", "[]"),
    ("Combine the partial answers", "combined answer"),
    ("Text:\nStreamlib is a Python library", ENTITY_RECORDS_OVERVIEW),
    ("Text:\nThe Pipeline class builds", ENTITY_RECORDS_API),
    ("Text:\n# Examples", ENTITY_RECORDS_CODES),
]


def make_pipeline_provider(extra_rules=None, seed=0, dim=32):
    rules = list(extra_rules or []) + list(PIPELINE_RULES)
    return scripted_mock(default_reply="scripted default", rules=rules, seed=seed, dim=dim)


@pytest.fixture
def fixture_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "overview.md").write_text(OVERVIEW_MD, encoding="utf-8")
    (corpus / "api.md").write_text(API_MD, encoding="utf-8")
    (corpus / "codes.md").write_text(CODES_MD, encoding="utf-8")
    return corpus


@pytest.fixture
def pipeline_provider():
    return make_pipeline_provider()


@pytest.fixture
def built_dir(tmp_path, fixture_corpus, pipeline_provider):
    """Ingest + graph build over the fixture corpus with the scripted mock."""
    out = tmp_path / "out"
    params = BuildParams(chunk_size=1200, overlap=100, seed=0)
    ingest(fixture_corpus, out, pipeline_provider, params)
    build_graph(out, pipeline_provider, params)
    return out
