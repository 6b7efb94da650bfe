"""Command-line driver: ingest, sample, index, embed, search, evaluate,
simulate, serve, synth.

Exit codes: 0 success, 1 usage error, 2 data error. Every command logs its
resolved configuration before doing work, and artifact-producing commands
are deterministic given identical inputs and seeds. Relative paths resolve
against the workspace directory (--workspace or RECALLKIT_WORKSPACE).
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import click

from . import plots
from .corpus import (
    CorpusStore,
    FORMAT_JSONL,
    FORMAT_XML,
    ingest_corpus,
    load_splits,
    sample_splits,
    save_splits,
)
from .dense import (
    EmbeddingStore,
    hash_embed,
    hash_embedder,
    load_embeddings,
    load_embeddings_jsonl,
    save_embeddings,
    save_embeddings_jsonl,
)
from .errors import WorkbenchError
from .feedback import AVERAGE_MODES, AVERAGE_SEQUENTIAL, STRATEGY_KINDS, StrategyConfig
from .hnsw import HnswIndex, build_hnsw
from .ranking import (
    RANK_FIRST,
    RANK_MODES,
    evaluate_qbd,
    rank_documents,
    write_curve_csv,
)
from .simulator import (
    BACKEND_EXACT,
    SESSION_BACKENDS,
    RetrievalEngine,
    run_experiment,
    write_experiment_csv,
)
from .text import load_stopwords
from .tfidf import GRANULARITY_DOCUMENT, GRANULARITY_PARAGRAPH, MltParams, TfidfIndex

log = logging.getLogger(__name__)

SEARCH_BACKENDS = ("mlt", "dvs", "hnsw")
QUERY_POLICIES = ("document", "first-paragraph")


def _ws() -> Path:
    ctx = click.get_current_context()
    return Path(ctx.obj or ".")


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    return p if p.is_absolute() else _ws() / p


def _default_path(kind: str, params: dict, suffix: str) -> Path:
    digest = hashlib.blake2s(
        json.dumps(params, sort_keys=True, default=str).encode(), digest_size=4
    ).hexdigest()
    return _ws() / f"{kind}-{digest}{suffix}"


def _announce() -> None:
    ctx = click.get_current_context()
    log.info(
        "%s config: %s",
        ctx.command.name,
        json.dumps(ctx.params, sort_keys=True, default=str),
    )


def _load_corpus(path: Path) -> CorpusStore:
    return ingest_corpus(path, FORMAT_JSONL)


def _load_vectors(path: Path) -> EmbeddingStore:
    if path.suffix == ".jsonl":
        return load_embeddings_jsonl(path)
    return load_embeddings(path)


def _parse_k_grid(text: str) -> list[int]:
    try:
        if ":" in text:
            start, stop, step = (int(part) for part in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse k grid {text!r}") from exc


def _split_or_fail(splits_path: Path, name: str):
    splits = load_splits(splits_path)
    if name not in splits:
        raise WorkbenchError(
            f"split {name!r} not in {splits_path} (have: {sorted(splits)})"
        )
    return splits[name]


@click.group()
@click.option(
    "--workspace",
    envvar="RECALLKIT_WORKSPACE",
    default=".",
    show_default=True,
    help="Directory that relative paths resolve against.",
)
@click.pass_context
def cli(ctx: click.Context, workspace: str) -> None:
    """Recall-oriented retrieval workbench."""
    ctx.obj = workspace


@cli.command()
@click.option("--input", "input_path", required=True, help="Corpus file or directory.")
@click.option(
    "--format",
    "input_format",
    type=click.Choice([FORMAT_JSONL, FORMAT_XML]),
    default=FORMAT_JSONL,
    show_default=True,
)
@click.option("--output", "output_path", default=None, help="Normalized corpus jsonl.")
def ingest(input_path: str, input_format: str, output_path: str | None) -> None:
    """Load a corpus and write it in the normalized jsonl form."""
    _announce()
    store = ingest_corpus(_resolve(input_path), input_format)
    out = _resolve(output_path) or _default_path(
        "corpus", {"input": input_path, "format": input_format}, ".jsonl"
    )
    store.save_jsonl(out)
    log.info("ingested %d documents over %d topics", len(store), len(store.topics()))
    click.echo(str(out))


@cli.command()
@click.option("--corpus", "corpus_path", required=True)
@click.option("--per-topic", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--unrelated-topics", default=15, show_default=True)
@click.option("--ambiguous-parent", default=None)
@click.option("--ambiguous-children", default=4, show_default=True)
@click.option("--allow-short", is_flag=True, help="Keep topics smaller than --per-topic.")
@click.option("--output", "output_path", default=None)
def sample(
    corpus_path: str,
    per_topic: int,
    seed: int,
    unrelated_topics: int,
    ambiguous_parent: str | None,
    ambiguous_children: int,
    allow_short: bool,
    output_path: str | None,
) -> None:
    """Sample topic splits (train/validation/test, optional ambiguous)."""
    _announce()
    store = _load_corpus(_resolve(corpus_path))
    splits = sample_splits(
        store,
        per_topic=per_topic,
        seed=seed,
        unrelated_topics=unrelated_topics,
        ambiguous_parent=ambiguous_parent,
        ambiguous_children=ambiguous_children,
        allow_short=allow_short,
    )
    out = _resolve(output_path) or _default_path(
        "splits", {"corpus": corpus_path, "seed": seed, "per_topic": per_topic}, ".json"
    )
    save_splits(splits, out)
    for name, assignment in sorted(splits.items()):
        log.info("split %s: %d topics, %d documents", name, len(assignment.topics), len(assignment.doc_ids()))
    click.echo(str(out))


@cli.command()
@click.option("--corpus", "corpus_path", required=True)
@click.option("--dim", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["emb1", "jsonl"]),
    default="emb1",
    show_default=True,
)
@click.option("--output", "output_path", default=None)
def embed(
    corpus_path: str, dim: int, seed: int, output_format: str, output_path: str | None
) -> None:
    """Hash-embed every paragraph of a corpus."""
    _announce()
    store = _load_corpus(_resolve(corpus_path))
    truncated = 0
    items = []
    for para in store.paragraphs():
        if para.truncated:
            truncated += 1
        items.append((para.para_id, hash_embed(para.embedding_text(), dim=dim, seed=seed)))
    embeddings = EmbeddingStore.from_items(items)
    suffix = ".jsonl" if output_format == "jsonl" else ".bin"
    out = _resolve(output_path) or _default_path(
        "embeddings", {"corpus": corpus_path, "dim": dim, "seed": seed}, suffix
    )
    if output_format == "jsonl":
        save_embeddings_jsonl(out, embeddings)
    else:
        save_embeddings(out, embeddings)
    if truncated:
        log.warning("%d paragraphs exceeded the embedder word limit", truncated)
    log.info("embedded %d paragraphs at dim %d", len(embeddings), dim)
    click.echo(str(out))


@cli.group()
def index() -> None:
    """Build search indexes."""


@index.command("tfidf")
@click.option("--corpus", "corpus_path", required=True)
@click.option(
    "--granularity",
    type=click.Choice([GRANULARITY_DOCUMENT, GRANULARITY_PARAGRAPH]),
    default=GRANULARITY_DOCUMENT,
    show_default=True,
)
@click.option("--stopwords", "stopwords_path", default=None, help="One stopword per line.")
@click.option("--output", "output_path", default=None)
def index_tfidf(
    corpus_path: str, granularity: str, stopwords_path: str | None, output_path: str | None
) -> None:
    """Build and persist the term index."""
    _announce()
    store = _load_corpus(_resolve(corpus_path))
    stopwords = load_stopwords(_resolve(stopwords_path))
    built = TfidfIndex.from_corpus(store, granularity, stopwords)
    out = _resolve(output_path) or _default_path(
        "tfidf", {"corpus": corpus_path, "granularity": granularity}, ".tfx"
    )
    built.save(out)
    log.info("indexed %d %s units, vocabulary %d", len(built), granularity, len(built.stats.df))
    click.echo(str(out))


@index.command("dense")
@click.option("--embeddings", "embeddings_path", required=True)
@click.option("--hnsw-m", default=16, show_default=True)
@click.option("--ef-construction", default=200, show_default=True)
@click.option("--level-seed", default=0, show_default=True)
@click.option("--output", "output_path", default=None)
def index_dense(
    embeddings_path: str,
    hnsw_m: int,
    ef_construction: int,
    level_seed: int,
    output_path: str | None,
) -> None:
    """Build and persist the proximity-graph index over stored embeddings."""
    _announce()
    store = _load_vectors(_resolve(embeddings_path))
    built = build_hnsw(
        ((uid, store.vector(uid)) for uid in store.ids),
        dim=store.dim,
        m=hnsw_m,
        ef_construction=ef_construction,
        level_seed=level_seed,
    )
    out = _resolve(output_path) or _default_path(
        "hnsw",
        {"embeddings": embeddings_path, "m": hnsw_m, "efc": ef_construction, "seed": level_seed},
        ".hnsw",
    )
    built.save(out)
    log.info("indexed %d vectors, dim %d, m %d", len(built), built.dim, built.m)
    click.echo(str(out))


@cli.command()
@click.option("--query-id", required=True, help="Document or paragraph id to query by.")
@click.option("--backend", type=click.Choice(SEARCH_BACKENDS), default="dvs", show_default=True)
@click.option("--rank", type=click.Choice(list(RANK_MODES)), default=RANK_FIRST, show_default=True)
@click.option("--k", default=10, show_default=True)
@click.option("--tfidf", "tfidf_path", default=None, help="Term index (mlt backend).")
@click.option("--embeddings", "embeddings_path", default=None, help="Embeddings (dvs backend).")
@click.option("--hnsw", "hnsw_path", default=None, help="Proximity-graph index (hnsw backend).")
@click.option("--ef", default=100, show_default=True, help="Beam width for the hnsw backend.")
@click.option("--max-df", default=0.8, show_default=True)
@click.option("--min-df", default=0.0, show_default=True)
@click.option("--max-query-terms", default=25, show_default=True)
def search(
    query_id: str,
    backend: str,
    rank: str,
    k: int,
    tfidf_path: str | None,
    embeddings_path: str | None,
    hnsw_path: str | None,
    ef: int,
    max_df: float,
    min_df: float,
    max_query_terms: int,
) -> None:
    """Query by document and print a ranked document table as CSV."""
    _announce()
    fetch = max(20 * k, 200)
    if backend == "mlt":
        if tfidf_path is None:
            raise click.UsageError("--tfidf is required for the mlt backend")
        term_index = TfidfIndex.load(_resolve(tfidf_path))
        params = MltParams(min_df=min_df, max_df=max_df, max_query_terms=max_query_terms)
        unit = query_id
        if query_id not in term_index and term_index.granularity == GRANULARITY_PARAGRAPH:
            unit = term_index.document_units(query_id)[0]
        hits = term_index.mlt_search(unit, params, k=min(fetch, len(term_index)))
    elif backend == "dvs":
        if embeddings_path is None:
            raise click.UsageError("--embeddings is required for the dvs backend")
        store = _load_vectors(_resolve(embeddings_path))
        engine = RetrievalEngine(store)
        if query_id in store:
            query = store.vector(query_id)
        else:
            query = engine.document_embedding(query_id)
        hits = store.search(query, k=min(fetch, len(store)))
    else:
        if hnsw_path is None:
            raise click.UsageError("--hnsw is required for the hnsw backend")
        graph = HnswIndex.load(_resolve(hnsw_path))
        query = graph.vector(query_id)
        hits = graph.search(query, k=min(fetch, len(graph)), ef=max(ef, min(fetch, len(graph))))

    query_doc = query_id.rsplit("#", 1)[0]
    best: dict[str, object] = {}
    for hit in hits:
        best.setdefault(hit.parent_id, hit)
    docs = [d for d in rank_documents([h.parent_id for h in hits], rank) if d != query_doc]
    writer = csv.writer(sys.stdout)
    writer.writerow(["rank", "doc_id", "para_id", "score"])
    for position, doc in enumerate(docs[:k], start=1):
        hit = best[doc]
        writer.writerow([position, doc, hit.unit_id, f"{hit.score:.6f}"])


@cli.command()
@click.option("--splits", "splits_path", required=True)
@click.option("--split", "split_name", required=True)
@click.option("--backend", type=click.Choice(SEARCH_BACKENDS), default="dvs", show_default=True)
@click.option("--rank", type=click.Choice(list(RANK_MODES)), default=RANK_FIRST, show_default=True)
@click.option(
    "--query-policy", type=click.Choice(QUERY_POLICIES), default="document", show_default=True
)
@click.option("--k-grid", default="10:300:10", show_default=True, help="start:stop:step or list.")
@click.option("--tfidf", "tfidf_path", default=None)
@click.option("--embeddings", "embeddings_path", default=None)
@click.option("--hnsw", "hnsw_path", default=None)
@click.option("--ef", default=100, show_default=True)
@click.option("--queries-per-topic", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-df", default=0.8, show_default=True)
@click.option("--min-df", default=0.0, show_default=True)
@click.option("--max-query-terms", default=25, show_default=True)
@click.option("--out-dir", "out_dir", default=None)
def evaluate(
    splits_path: str,
    split_name: str,
    backend: str,
    rank: str,
    query_policy: str,
    k_grid: str,
    tfidf_path: str | None,
    embeddings_path: str | None,
    hnsw_path: str | None,
    ef: int,
    queries_per_topic: int | None,
    seed: int,
    max_df: float,
    min_df: float,
    max_query_terms: int,
    out_dir: str | None,
) -> None:
    """Macro-averaged recall/precision/F1 curves for query-by-document search.

    Writes curves.csv and curves.png side by side in the output directory.
    """
    import random as _random

    _announce()
    split = _split_or_fail(_resolve(splits_path), split_name)
    ks = _parse_k_grid(k_grid)
    max_k = max(ks)

    if backend == "mlt":
        if tfidf_path is None:
            raise click.UsageError("--tfidf is required for the mlt backend")
        term_index = TfidfIndex.load(_resolve(tfidf_path))
        params = MltParams(min_df=min_df, max_df=max_df, max_query_terms=max_query_terms)
        if query_policy == "document" and term_index.granularity != GRANULARITY_DOCUMENT:
            raise WorkbenchError("document query policy needs a document-granularity term index")
        if query_policy == "first-paragraph" and term_index.granularity != GRANULARITY_PARAGRAPH:
            raise WorkbenchError(
                "first-paragraph query policy needs a paragraph-granularity term index"
            )
        fetch = len(term_index)

        def searcher(doc_id: str):
            unit = doc_id if query_policy == "document" else term_index.document_units(doc_id)[0]
            return term_index.mlt_search(unit, params, k=fetch)

    else:
        if embeddings_path is None and backend == "dvs":
            raise click.UsageError("--embeddings is required for the dvs backend")
        if hnsw_path is None and backend == "hnsw":
            raise click.UsageError("--hnsw is required for the hnsw backend")
        if backend == "dvs":
            store = _load_vectors(_resolve(embeddings_path))
            engine = RetrievalEngine(store)
            fetch = min(len(store), 20 * max_k)

            def query_vector(doc_id: str):
                if query_policy == "document":
                    return engine.document_embedding(doc_id)
                return engine.embedding(engine.paragraph_ids(doc_id)[0])

            def searcher(doc_id: str):
                return store.search(query_vector(doc_id), k=fetch)

        else:
            graph = HnswIndex.load(_resolve(hnsw_path))
            graph_engine = RetrievalEngine(
                EmbeddingStore(graph.ids, [graph.vector(uid) for uid in graph.ids])
            )
            fetch = min(len(graph), 20 * max_k)

            def query_vector(doc_id: str):
                if query_policy == "document":
                    return graph_engine.document_embedding(doc_id)
                return graph_engine.embedding(graph_engine.paragraph_ids(doc_id)[0])

            def searcher(doc_id: str):
                return graph.search(query_vector(doc_id), k=fetch, ef=max(ef, fetch))

    topic_queries = {}
    for topic, docs in split.topics.items():
        queries = list(docs)
        if queries_per_topic is not None and queries_per_topic < len(queries):
            sampler = _random.Random(f"{seed}:{split_name}:{topic}")
            queries = sorted(sampler.sample(queries, queries_per_topic))
        topic_queries[topic] = queries
    topic_relevant = {topic: set(docs) for topic, docs in split.topics.items()}

    points = evaluate_qbd(
        topic_queries,
        topic_relevant,
        searcher,
        rank_mode=rank,
        k_grid=ks,
        backend=backend,
        query_policy=query_policy,
    )
    target = _resolve(out_dir) or _default_path(
        "eval", {"splits": splits_path, "split": split_name, "backend": backend, "rank": rank}, ""
    )
    target.mkdir(parents=True, exist_ok=True)
    csv_path = target / "curves.csv"
    png_path = target / "curves.png"
    write_curve_csv(csv_path, points)
    plots.plot_curves(points, png_path, title=f"{split_name}: {backend}/{rank}/{query_policy}")
    log.info("wrote %s and %s", csv_path, png_path)
    click.echo(str(csv_path))
    click.echo(str(png_path))


@cli.command()
@click.option("--splits", "splits_path", required=True)
@click.option("--split", "split_name", required=True)
@click.option("--embeddings", "embeddings_path", required=True)
@click.option("--tfidf", "tfidf_path", default=None, help="Needed for keyword expansion.")
@click.option("--hnsw", "hnsw_path", default=None)
@click.option(
    "--strategy",
    "strategies",
    type=click.Choice(list(STRATEGY_KINDS)),
    multiple=True,
    default=("none",),
    show_default=True,
)
@click.option("--cumulative", type=click.BOOL, default=False, show_default=True)
@click.option("--amplify", type=click.BOOL, default=False, show_default=True)
@click.option(
    "--average-mode",
    type=click.Choice(list(AVERAGE_MODES)),
    default=AVERAGE_SEQUENTIAL,
    show_default=True,
)
@click.option("--alpha", default=0.5, show_default=True)
@click.option("--beta", default=0.5, show_default=True)
@click.option("--keywords-per-doc", default=3, show_default=True)
@click.option("--batch", "batch_size", default=10, show_default=True)
@click.option("--target-recall", default=0.8, show_default=True)
@click.option("--max-iterations", default=1000, show_default=True)
@click.option(
    "--backend", type=click.Choice(list(SESSION_BACKENDS)), default=BACKEND_EXACT, show_default=True
)
@click.option("--rank", type=click.Choice(list(RANK_MODES)), default=RANK_FIRST, show_default=True)
@click.option("--ef", default=100, show_default=True)
@click.option(
    "--query-policy",
    "session_query_policy",
    type=click.Choice(["first", "random"]),
    default="first",
    show_default=True,
)
@click.option("--queries-per-topic", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--traces", "want_traces", is_flag=True, help="Also write per-session traces.")
@click.option("--out-dir", "out_dir", default=None)
def simulate(
    splits_path: str,
    split_name: str,
    embeddings_path: str,
    tfidf_path: str | None,
    hnsw_path: str | None,
    strategies: tuple[str, ...],
    cumulative: bool,
    amplify: bool,
    average_mode: str,
    alpha: float,
    beta: float,
    keywords_per_doc: int,
    batch_size: int,
    target_recall: float,
    max_iterations: int,
    backend: str,
    rank: str,
    ef: int,
    session_query_policy: str,
    queries_per_topic: int | None,
    seed: int,
    want_traces: bool,
    out_dir: str | None,
) -> None:
    """Run labeled review sessions and write the iteration statistics table.

    Writes experiment.csv and experiment.png side by side (and traces.json
    plus traces.png with --traces).
    """
    _announce()
    split = _split_or_fail(_resolve(splits_path), split_name)
    store = _load_vectors(_resolve(embeddings_path))
    term_index = TfidfIndex.load(_resolve(tfidf_path)) if tfidf_path else None
    graph = HnswIndex.load(_resolve(hnsw_path)) if hnsw_path else None
    engine = RetrievalEngine(store, tfidf_index=term_index, ann=graph)

    configs = [
        StrategyConfig(
            kind=kind,
            cumulative=cumulative,
            amplify=amplify,
            alpha=alpha,
            beta=beta,
            keywords_per_doc=keywords_per_doc,
            average_mode=average_mode,
        )
        for kind in strategies
    ]
    doc_paragraphs = {
        doc_id: engine.paragraph_ids(doc_id) for doc_id in split.doc_ids()
    }
    trace_sink: list[dict] | None = [] if want_traces else None
    rows = run_experiment(
        engine,
        split_name,
        split.topics,
        configs,
        doc_paragraphs,
        batch_size=batch_size,
        target_recall=target_recall,
        max_iterations=max_iterations,
        backend=backend,
        rank_mode=rank,
        ef_search=ef,
        query_policy=session_query_policy,
        seed=seed,
        queries_per_topic=queries_per_topic,
        trace_sink=trace_sink,
    )
    target = _resolve(out_dir) or _default_path(
        "sim",
        {"splits": splits_path, "split": split_name, "strategies": strategies, "seed": seed},
        "",
    )
    target.mkdir(parents=True, exist_ok=True)
    csv_path = target / "experiment.csv"
    png_path = target / "experiment.png"
    write_experiment_csv(csv_path, rows)
    plots.plot_experiment(rows, png_path, title=f"{split_name}: iterations to {target_recall:.0%} recall")
    log.info("wrote %s and %s", csv_path, png_path)
    click.echo(str(csv_path))
    click.echo(str(png_path))
    if trace_sink is not None:
        traces_path = target / "traces.json"
        with open(traces_path, "w") as out:
            json.dump(trace_sink, out, indent=2, sort_keys=True)
        grouped: dict[str, list] = {}
        for entry in trace_sink:
            grouped.setdefault(entry["strategy"], []).append(entry["recall_trace"])
        traces_png = target / "traces.png"
        plots.plot_traces(grouped, traces_png, title=f"{split_name}: recall per iteration")
        log.info("wrote %s and %s", traces_path, traces_png)
        click.echo(str(traces_path))


@cli.command()
@click.option("--corpus", "corpus_path", default=None, help="For snippets and recall labels.")
@click.option("--embeddings", "embeddings_path", required=True)
@click.option("--tfidf", "tfidf_path", default=None)
@click.option("--hnsw", "hnsw_path", default=None)
@click.option("--db", "db_path", default="sessions.db", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--batch", "batch_size", default=10, show_default=True)
@click.option(
    "--backend", type=click.Choice(list(SESSION_BACKENDS)), default=BACKEND_EXACT, show_default=True
)
@click.option("--rank", type=click.Choice(list(RANK_MODES)), default=RANK_FIRST, show_default=True)
@click.option("--ef", default=100, show_default=True)
@click.option("--text-queries", is_flag=True, help="Enable raw-text queries via the hash embedder.")
@click.option("--hash-seed", default=0, show_default=True)
@click.option("--ui", "ui_dir", default=None, help="Directory of built UI assets to serve at /.")
def serve(
    corpus_path: str | None,
    embeddings_path: str,
    tfidf_path: str | None,
    hnsw_path: str | None,
    db_path: str,
    host: str,
    port: int,
    batch_size: int,
    backend: str,
    rank: str,
    ef: int,
    text_queries: bool,
    hash_seed: int,
    ui_dir: str | None,
) -> None:
    """Serve the interactive review session API (and optionally the UI)."""
    import uvicorn

    from .service import create_app

    _announce()
    store = _load_vectors(_resolve(embeddings_path))
    corpus = _load_corpus(_resolve(corpus_path)) if corpus_path else None
    term_index = TfidfIndex.load(_resolve(tfidf_path)) if tfidf_path else None
    graph = HnswIndex.load(_resolve(hnsw_path)) if hnsw_path else None
    engine = RetrievalEngine(store, tfidf_index=term_index, ann=graph)
    embedder = hash_embedder(dim=store.dim, seed=hash_seed) if text_queries else None
    app = create_app(
        engine,
        corpus=corpus,
        db_path=_resolve(db_path),
        embedder=embedder,
        batch_size=batch_size,
        rank_mode=rank,
        backend=backend,
        ef_search=ef,
    )
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=_resolve(ui_dir), html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="info")


@cli.command()
@click.option("--topics", default=5, show_default=True)
@click.option("--docs-per-topic", default=300, show_default=True)
@click.option("--dim", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", "out_dir", default=None)
def synth(topics: int, docs_per_topic: int, dim: int, seed: int, out_dir: str | None) -> None:
    """Generate the seeded synthetic clustered corpus, splits, and embeddings."""
    from .synth import SynthConfig, synth_corpus, synth_embeddings, synth_split

    _announce()
    config = SynthConfig(topics=topics, docs_per_topic=docs_per_topic, seed=seed)
    store = synth_corpus(config)
    embeddings = synth_embeddings(store, dim=dim, seed=seed)
    split = synth_split(store, seed=seed)
    target = _resolve(out_dir) or _default_path(
        "synth", {"topics": topics, "docs": docs_per_topic, "dim": dim, "seed": seed}, ""
    )
    target.mkdir(parents=True, exist_ok=True)
    corpus_path = target / "corpus.jsonl"
    splits_path = target / "splits.json"
    embeddings_path = target / "embeddings.bin"
    store.save_jsonl(corpus_path)
    save_splits({split.split_name: split}, splits_path)
    save_embeddings(embeddings_path, embeddings)
    log.info(
        "synthetic corpus: %d documents, %d topics, dim %d", len(store), len(store.topics()), dim
    )
    for path in (corpus_path, splits_path, embeddings_path):
        click.echo(str(path))


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        if exc.ctx is not None:
            sys.stderr.write(exc.ctx.get_usage() + "\n")
        sys.stderr.write(f"error: {exc.format_message()}\n")
        return 1
    except click.Abort:
        sys.stderr.write("aborted\n")
        return 1
    except click.ClickException as exc:
        sys.stderr.write(f"error: {exc.format_message()}\n")
        return 1
    except (WorkbenchError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
