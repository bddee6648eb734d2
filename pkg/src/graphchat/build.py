"""Build orchestration: corpus to artifacts, artifacts to a live engine.

Everything a build writes lands under one output directory:

    chunks.csv        embedding index over every chunk (id,text,vectors)
    code_chunks.csv   same, restricted to code-tagged documents (optional)
    entities.csv      embedding index over entity name+description
    qa.csv/qa.json    prepared question/answer pairs (optional)
    entities.json, relationships.json, communities.json, reports.json
    manifest.json     parameters, seed, template version, counts

Outputs contain no timestamps, so identical inputs and seed rebuild
byte-identical artifacts under the deterministic mock provider.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import prompts
from .corpus import (
    DEFAULT_CHUNK_OVERLAP,
    DEFAULT_CHUNK_SIZE,
    chunk_corpus,
    code_doc_ids,
    load_corpus,
    read_manifest,
)
from .engine import Engine, EngineConfig, QaStore
from .errors import GraphChatError
from .index import EmbeddingIndex, build_index, load_csv, save_csv
from .kg.artifacts import (
    export_graph,
    export_manifest,
    export_reports,
    load_communities,
    load_graph,
    load_manifest,
    load_reports,
)
from .kg.extraction import extract_elements
from .kg.graph import merge_elements
from .kg.leiden import LeidenResult, leiden_partition
from .kg.reports import summarize_communities
from .providers import Provider

log = logging.getLogger(__name__)

CHUNKS_CSV = "chunks.csv"
CODE_CHUNKS_CSV = "code_chunks.csv"
ENTITIES_CSV = "entities.csv"
QA_CSV = "qa.csv"
QA_ANSWERS = "qa.json"


@dataclass
class BuildParams:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_CHUNK_OVERLAP
    max_gleanings: int = 2
    resolution: float = 1.0
    seed: int = 0
    max_levels: int = 4
    report_levels: tuple[int, ...] = (0, 1)
    summary_budget: int = 1500
    extraction_workers: int = 4
    kind_patterns: dict[str, str] | None = None


def ingest(
    corpus_dir: str | Path,
    out_dir: str | Path,
    provider: Provider,
    params: BuildParams | None = None,
    manifest_file: str | Path | None = None,
    qa_file: str | Path | None = None,
) -> dict:
    """Chunk the corpus and write the embedding CSVs."""
    params = params or BuildParams()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest_entries = read_manifest(Path(manifest_file)) if manifest_file else None
    docs = load_corpus(corpus_dir, manifest=manifest_entries, kind_patterns=params.kind_patterns)
    chunks = chunk_corpus(docs, params.chunk_size, params.overlap)
    index = build_index(chunks, provider)
    save_csv(index, out / CHUNKS_CSV)

    code_ids = code_doc_ids(docs)
    code_chunks = [c for c in chunks if c.doc_id in code_ids]
    if code_chunks:
        save_csv(build_index(code_chunks, provider), out / CODE_CHUNKS_CSV)

    qa_count = 0
    if qa_file:
        pairs = _load_qa_pairs(qa_file)
        qa_store = QaStore.build(pairs, provider)
        save_csv(qa_store.index, out / QA_CSV)
        (out / QA_ANSWERS).write_text(
            json.dumps(qa_store.answers, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        qa_count = len(pairs)

    summary = {
        "documents": [{"doc_id": d.doc_id, "kind": d.kind, "chars": len(d.text)} for d in docs],
        "chunk_size": params.chunk_size,
        "overlap": params.overlap,
        "chunks": len(chunks),
        "code_chunks": len(code_chunks),
        "qa_pairs": qa_count,
    }
    manifest = _read_or_empty_manifest(out)
    manifest["corpus"] = summary
    export_manifest(out, manifest)
    log.info("ingested %d documents into %d chunks", len(docs), len(chunks))
    return summary


def _load_qa_pairs(path: str | Path) -> list[tuple[str, str, str]]:
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    pairs: list[tuple[str, str, str]] = []
    for row in rows:
        pairs.append((str(row["id"]), row["question"], row["answer"]))
    if not pairs:
        raise GraphChatError(f"no QA pairs in {path}")
    return pairs


def _read_or_empty_manifest(out: Path) -> dict:
    try:
        return load_manifest(out)
    except (OSError, json.JSONDecodeError):
        return {}


def build_graph(
    out_dir: str | Path,
    provider: Provider,
    params: BuildParams | None = None,
    templates: prompts.TemplateSet | None = None,
) -> dict:
    """Extraction, merge, clustering and reports over the ingested chunks."""
    params = params or BuildParams()
    tpl = templates or prompts.default_templates()
    out = Path(out_dir)
    chunk_index = load_csv(out / CHUNKS_CSV)
    items = chunk_index.items()
    if not items:
        raise GraphChatError("no chunks ingested; run ingest first")

    def extract_one(item):
        from .corpus import Chunk

        chunk = Chunk(
            chunk_id=item.item_id,
            doc_id=item.item_id.split("#", 1)[0],
            text=item.text,
            start=0,
            end=len(item.text),
            index=0,
        )
        return extract_elements(chunk, provider, params.max_gleanings, tpl)

    if params.extraction_workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=params.extraction_workers) as pool:
            results = list(pool.map(extract_one, items))
    else:
        results = [extract_one(item) for item in items]

    raw_entities = [e for ents, _ in results for e in ents]
    raw_relationships = [r for _, rels in results for r in rels]
    graph = merge_elements(
        raw_entities, raw_relationships, provider, params.summary_budget, tpl
    )

    result: LeidenResult | None = None
    reports = []
    if graph.entities:
        result = leiden_partition(
            graph, resolution=params.resolution, seed=params.seed, max_levels=params.max_levels
        )
        reports = summarize_communities(
            graph, result, provider, levels_to_report=params.report_levels, templates=tpl
        )
        entity_index = build_index(
            [
                (name, f"{name}: {graph.entities[name].description}")
                for name in sorted(graph.entities)
            ],
            provider,
        )
        save_csv(entity_index, out / ENTITIES_CSV)

    export_graph(graph, result, out)
    export_reports(reports, out)

    manifest = _read_or_empty_manifest(out)
    manifest["graph"] = {
        "seed": params.seed,
        "resolution": params.resolution,
        "max_gleanings": params.max_gleanings,
        "max_levels": params.max_levels,
        "report_levels": list(params.report_levels),
        "summary_budget": params.summary_budget,
        "template_version": tpl.version,
        "entities": len(graph.entities),
        "relationships": len(graph.relationships),
        "communities": len(result.assignments) if result else 0,
        "levels": result.levels() if result else [],
        "reports": len(reports),
    }
    export_manifest(out, manifest)
    log.info(
        "graph built: %d entities, %d relationships, %d reports",
        len(graph.entities),
        len(graph.relationships),
        len(reports),
    )
    return manifest["graph"]


def load_engine(
    out_dir: str | Path,
    provider: Provider,
    engine_config: EngineConfig | None = None,
    templates: prompts.TemplateSet | None = None,
) -> tuple[Engine, dict]:
    """Assemble an Engine from a build directory. Returns (engine, manifest)."""
    out = Path(out_dir)
    if not (out / CHUNKS_CSV).exists():
        raise GraphChatError(f"no build found under {out} (missing {CHUNKS_CSV})")
    chunk_index = load_csv(out / CHUNKS_CSV)
    code_index = load_csv(out / CODE_CHUNKS_CSV) if (out / CODE_CHUNKS_CSV).exists() else None

    graph = None
    entity_index: EmbeddingIndex | None = None
    reports = []
    if (out / "entities.json").exists():
        graph = load_graph(out)
        if graph.entities and (out / ENTITIES_CSV).exists():
            entity_index = load_csv(out / ENTITIES_CSV)
        if (out / "reports.json").exists():
            reports = load_reports(out)

    qa_store = None
    if (out / QA_CSV).exists() and (out / QA_ANSWERS).exists():
        qa_index = load_csv(out / QA_CSV)
        answers = json.loads((out / QA_ANSWERS).read_text(encoding="utf-8"))
        qa_store = QaStore(index=qa_index, answers=answers)

    engine = Engine(
        provider=provider,
        chunk_index=chunk_index,
        graph=graph,
        entity_index=entity_index,
        reports=reports,
        qa_store=qa_store,
        code_chunk_index=code_index,
        config=engine_config,
        templates=templates,
    )
    return engine, _read_or_empty_manifest(out)


def load_assignments(out_dir: str | Path):
    out = Path(out_dir)
    if not (out / "communities.json").exists():
        return []
    return load_communities(out)
