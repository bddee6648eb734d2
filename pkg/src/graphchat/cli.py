"""Command-line entry points: ingest, build-graph, query, bench, serve.

Exit codes: 0 success, 1 usage or domain error, 2 typed domain outcome
(e.g. no relevant communities), 3 provider failure.
"""

from __future__ import annotations

import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import click

from .bench.analysis import analyze, render_analysis_text, render_truncated, analysis_to_json
from .bench.dataset import apply_answer_key, load_benchmark
from .bench.runner import (
    engine_target,
    load_scorecard,
    provider_target,
    run_model_benchmark,
    save_scorecard,
)
from .build import BuildParams, build_graph, ingest, load_assignments, load_engine
from .config import Config, load_config
from .engine import ChatSession, ChatTurn, EngineConfig, MODES
from .errors import (
    ExhaustedRetries,
    GraphChatError,
    ProviderError,
    ProviderTimeout,
)
from .providers import HttpProvider, ProviderConfig, load_mock_script, scripted_mock

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_OUTCOME = 2
EXIT_PROVIDER = 3


def provider_from_config(cfg: Config):
    p = cfg.section("provider")
    if p["kind"] == "mock":
        if p.get("mock_script"):
            return load_mock_script(p["mock_script"]), "mock"
        return (
            scripted_mock(default_reply="", dim=int(p["mock_dim"]), seed=int(p["mock_seed"])),
            "mock",
        )
    provider_cfg = ProviderConfig(
        base_url=p["base_url"],
        api_key=p.get("api_key") or None,
        chat_model_id=p["chat_model_id"],
        embed_model_id=p["embed_model_id"],
        timeout=float(p["timeout"]),
        max_retries=int(p["max_retries"]),
        max_concurrency=int(p["max_concurrency"]),
        trace_path=p.get("trace_path") or None,
    )
    return HttpProvider(provider_cfg), "http"


def engine_config_from(cfg: Config) -> EngineConfig:
    e = cfg.section("engine")
    return EngineConfig(
        top_k_entities=int(e["top_k_entities"]),
        top_k_chunks=int(e["top_k_chunks"]),
        entity_threshold=float(e["entity_threshold"]),
        chunk_threshold=float(e["chunk_threshold"]),
        faq_threshold=float(e["faq_threshold"]),
        context_budget=int(e["context_budget"]),
        history_window=int(e["history_window"]),
        map_batch_size=int(e["map_batch_size"]),
    )


def build_params_from(cfg: Config, **overrides) -> BuildParams:
    from .corpus import DEFAULT_KIND_PATTERNS, KIND_CODE

    c = cfg.section("corpus")
    g = cfg.section("graph")
    # Configured code patterns take precedence over the built-in kind map.
    kind_patterns = {str(pat): KIND_CODE for pat in c.get("code_patterns", [])}
    kind_patterns.update(
        {k: v for k, v in DEFAULT_KIND_PATTERNS.items() if k not in kind_patterns}
    )
    values = dict(
        chunk_size=int(c["chunk_size"]),
        overlap=int(c["overlap"]),
        max_gleanings=int(g["gleanings"]),
        resolution=float(g["resolution"]),
        seed=int(g["seed"]),
        max_levels=int(g["max_levels"]),
        report_levels=tuple(int(x) for x in g["report_levels"]),
        summary_budget=int(g["summary_budget"]),
        kind_patterns=kind_patterns,
    )
    values.update({k: v for k, v in overrides.items() if v is not None})
    return BuildParams(**values)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML config file; flags override it.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory all outputs land under.")
@click.option("-v", "--verbose", is_flag=True, default=False)
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, out_dir: str | None, verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    cfg = load_config(config_path)
    ctx.obj = {
        "config": cfg,
        "out": Path(out_dir or cfg.get("service", "artifacts_dir")),
    }


@cli.command("ingest")
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", "manifest_file", type=click.Path(exists=True), default=None)
@click.option("--size", type=int, default=None, help="Chunk size in characters.")
@click.option("--overlap", type=int, default=None, help="Chunk overlap in characters.")
@click.option("--qa", "qa_file", type=click.Path(exists=True), default=None,
              help="JSON file of prepared question/answer pairs.")
@click.pass_context
def ingest_cmd(ctx, corpus_dir, manifest_file, size, overlap, qa_file):
    """Chunk a corpus and write the embedding CSV index."""
    cfg: Config = ctx.obj["config"]
    provider, _ = provider_from_config(cfg)
    params = build_params_from(cfg, chunk_size=size, overlap=overlap)
    qa = qa_file or (cfg.get("corpus", "qa_file") or None)
    summary = ingest(corpus_dir, ctx.obj["out"], provider, params,
                     manifest_file=manifest_file, qa_file=qa)
    click.echo(
        f"ingested {len(summary['documents'])} documents -> {summary['chunks']} chunks "
        f"({summary['code_chunks']} code, {summary['qa_pairs']} qa pairs)"
    )


@cli.command("build-graph")
@click.option("--gleanings", type=int, default=None)
@click.option("--resolution", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--levels", "max_levels", type=int, default=None)
@click.pass_context
def build_graph_cmd(ctx, gleanings, resolution, seed, max_levels):
    """Extract entities, build the graph, cluster, and write reports."""
    cfg: Config = ctx.obj["config"]
    provider, _ = provider_from_config(cfg)
    params = build_params_from(
        cfg, max_gleanings=gleanings, resolution=resolution, seed=seed, max_levels=max_levels
    )
    info = build_graph(ctx.obj["out"], provider, params)
    click.echo(
        f"graph: {info['entities']} entities, {info['relationships']} relationships, "
        f"{info['reports']} reports over levels {info['levels']}"
    )


@cli.command("query")
@click.argument("question")
@click.option("--mode", type=click.Choice(MODES), default="local")
@click.pass_context
def query_cmd(ctx, question, mode):
    """One-shot answer to stdout, retrieval trace to stderr."""
    cfg: Config = ctx.obj["config"]
    provider, _ = provider_from_config(cfg)
    engine, _manifest = load_engine(ctx.obj["out"], provider, engine_config_from(cfg))
    outcome = engine.answer(question, ChatSession(), mode=mode)
    if isinstance(outcome, ChatTurn):
        click.echo(outcome.content)
        for ref in outcome.retrieval_trace:
            click.echo(f"{ref.source_kind}\t{ref.ref_id}\t{ref.score:.4f}", err=True)
        return
    click.echo(f"{type(outcome).__name__}: {outcome.describe()}", err=True)
    raise SystemExit(EXIT_OUTCOME)


@cli.group("bench")
def bench_group():
    """Run MCQ benchmarks and analyze recorded score sheets."""


@bench_group.command("run")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--target", type=click.Choice(["provider", "self"]), default="provider")
@click.option("--reps", type=int, default=None, help="Repetitions per question.")
@click.option("--temp", type=float, default=None, help="Sampling temperature.")
@click.option("--name", "model_name", default=None, help="Model name on the scorecard.")
@click.option("--answer-key", "answer_key", type=click.Path(exists=True), default=None,
              help="JSON {qid: letter} overlay for unkeyed questions.")
@click.pass_context
def bench_run_cmd(ctx, dataset_path, target, reps, temp, model_name, answer_key):
    """Evaluate a provider (or the engine itself) on an MCQ dataset."""
    cfg: Config = ctx.obj["config"]
    provider, kind = provider_from_config(cfg)
    questions = load_benchmark(dataset_path)
    if answer_key:
        key = json.loads(Path(answer_key).read_text(encoding="utf-8"))
        questions = apply_answer_key(questions, key)
    repetitions = reps if reps is not None else int(cfg.get("bench", "repetitions"))
    temperature = temp if temp is not None else float(cfg.get("bench", "temperature"))
    workers = int(cfg.get("bench", "workers"))

    if target == "self":
        econf = engine_config_from(cfg)
        econf.temperature = temperature
        engine, _ = load_engine(ctx.obj["out"], provider, econf)
        answer_fn = engine_target(engine)
        default_name = "self"
    else:
        answer_fn = provider_target(provider, temperature)
        default_name = cfg.get("provider", "chat_model_id") if kind == "http" else "mock"

    card = run_model_benchmark(
        answer_fn,
        questions,
        model_name=model_name or default_name,
        repetitions=repetitions,
        workers=workers,
    )
    out = Path(ctx.obj["out"])
    out.mkdir(parents=True, exist_ok=True)
    sheet = out / f"bench_{card.model_name}.jsonl"
    save_scorecard(card, sheet)
    for category, total in card.totals.items():
        count = len(card.scored_qids(category))
        click.echo(f"{category}: {render_truncated(total)} / {count}")
    if card.unkeyed:
        click.echo(f"warning: excluded from totals (no answer key): {', '.join(card.unkeyed)}")
    click.echo(f"scorecard written to {sheet}")


@bench_group.command("report")
@click.option("--results", "result_paths", type=click.Path(exists=True), multiple=True,
              required=True, help="Scorecard JSONL files; repeatable.")
@click.option("--ours", "ours_names", multiple=True,
              help="Model names treated as rows of the difference tables "
                   "(default: the first result).")
@click.option("--encoding", type=click.Choice(["correctness", "letter_ordinal"]),
              default="correctness")
@click.pass_context
def bench_report_cmd(ctx, result_paths, ours_names, encoding):
    """Difference/percentage tables, Pearson matrices, variability, similarity."""
    cards = [load_scorecard(p) for p in result_paths]
    if len(cards) < 2:
        raise click.UsageError("need at least two result files")
    if ours_names:
        ours = [c for c in cards if c.model_name in ours_names]
        others = [c for c in cards if c.model_name not in ours_names]
        if not ours or not others:
            raise click.UsageError("--ours must split the results into two non-empty groups")
    else:
        ours, others = [cards[0]], cards[1:]

    tables = analyze(ours, others, encoding=encoding)
    text = render_analysis_text(tables)
    out = Path(ctx.obj["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "analysis.txt").write_text(text, encoding="utf-8")
    (out / "analysis.json").write_text(analysis_to_json(tables) + "\n", encoding="utf-8")
    _write_analysis_csvs(tables, out)
    click.echo(text, nl=False)
    click.echo(f"analysis written to {out / 'analysis.txt'} and .json/.csv")


def _write_analysis_csvs(tables, out: Path) -> None:
    from .bench.analysis import render_matrix_csv

    diff = tables.difference
    for cat in diff.categories:
        (out / f"difference_{cat}.csv").write_text(
            render_matrix_csv(diff.row_names, diff.col_names, diff.difference[cat]),
            encoding="utf-8",
        )
        (out / f"percentage_{cat}.csv").write_text(
            render_matrix_csv(diff.row_names, diff.col_names, diff.percentage[cat], signed=True),
            encoding="utf-8",
        )
    for label, matrix in tables.pearson.items():
        rows = [[Fraction(v).limit_denominator(10**6) for v in row] for row in matrix.values]
        (out / f"pearson_{label}.csv").write_text(
            render_matrix_csv(matrix.model_names, matrix.model_names, rows),
            encoding="utf-8",
        )


@cli.command("serve")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--frontend", "frontend_dir", type=click.Path(), default=None,
              help="Static directory to serve at /ui (e.g. frontend/dist).")
@click.pass_context
def serve_cmd(ctx, host, port, frontend_dir):
    """Serve the chat API over HTTP."""
    import uvicorn

    from .service import EngineState, ServiceState, create_app
    from .sessions import SessionStore
    from .usagelog import UsageLog

    cfg: Config = ctx.obj["config"]
    svc = cfg.section("service")
    out = ctx.obj["out"]
    provider, kind = provider_from_config(cfg)

    def load_state() -> EngineState:
        engine, manifest = load_engine(out, provider, engine_config_from(cfg))
        return EngineState(
            engine=engine,
            manifest=manifest,
            assignments=load_assignments(out),
            provider_kind=kind,
        )

    try:
        engine_state = load_state()
    except GraphChatError as exc:
        log.warning("starting without a build: %s", exc)
        engine_state = None

    out.mkdir(parents=True, exist_ok=True)
    state = ServiceState(
        engine_state=engine_state,
        sessions=SessionStore(out / svc["sessions_db"], ttl_hours=float(svc["session_ttl_hours"])),
        usage=UsageLog(out / svc["usage_log"]),
        rate_capacity=int(svc["rate_capacity"]),
        rate_refill_per_s=float(svc["rate_refill_per_s"]),
        debug=bool(svc["debug"]),
    )
    app = create_app(state, frontend_dir=frontend_dir, reloader=load_state)
    uvicorn.run(app, host=host or svc["host"], port=port or int(svc["port"]))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except (ProviderError, ProviderTimeout, ExhaustedRetries) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_PROVIDER
    except GraphChatError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
