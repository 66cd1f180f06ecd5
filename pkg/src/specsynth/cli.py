"""Command-line entry points: ingest, index, query, eval, ablate, resolve, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import feedback as fb
from . import harness, ingest
from .embedder import EmbedderConfig, config_from_env, embed_batch
from .llm import LlmConfig
from .pipeline import Assistant, PipelineConfig, Session
from .prompting import BUILTIN_TEMPLATES, load_prompt_config
from .service import ServiceConfig, serve
from .vector_index import IndexEntry, RetrieverConfig, VectorIndex


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, PermissionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsynth",
        description="Retrieval-grounded question answering over technical specifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract, clean, and segment documents")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-words", type=int, default=360)
    p.add_argument("--strategy", choices=["section_aware", "fixed_overlap"], default="section_aware")
    p.add_argument("--fixed-chunk-words", type=int, default=1000)
    p.add_argument("--fixed-overlap-words", type=int, default=100)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="embed a corpus and build the vector index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embedder", choices=["local_hashed", "remote"], default="local_hashed")
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=384)
    p.add_argument("--model-name", default=None)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="answer one query against an index")
    p.add_argument("question")
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=3)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="run a benchmark and write a metric report")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--k", type=int, default=3)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep one axis, one benchmark run per value")
    p.add_argument("--axis", required=True, choices=list(harness.ABLATION_AXES))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report-dir", default=None)
    p.add_argument("--input-dir", default=None, help="raw documents, needed for the segmentation axis")
    p.add_argument("--k", type=int, default=3)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("resolve", help="resolve an expert request into the corpus")
    p.add_argument("--request", required=True)
    p.add_argument("--expert", required=True)
    p.add_argument("--text-file", required=True)
    p.add_argument("--queue-dir", default="requests")
    p.add_argument("--experts-file", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--dim", type=int, default=384)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--llm-backend", choices=["remote_http", "mock_echo_context", "mock_canned"], default="mock_echo_context")
    p.add_argument("--model", default="gpt-4")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-output-tokens", type=int, default=1000)
    p.add_argument("--canned-text", default="")
    p.add_argument("--prompt-variant", default="default")
    p.add_argument("--prompt-config", default=None)
    p.add_argument("--embedder-backend", choices=["local_hashed", "remote_http"], default="local_hashed")
    p.add_argument("--dim", type=int, default=384)
    p.add_argument("--budget-words", type=int, default=3000)


def _pipeline_config(args) -> PipelineConfig:
    templates = dict(BUILTIN_TEMPLATES)
    shots = []
    if args.prompt_config:
        templates, shots = load_prompt_config(args.prompt_config)
    if args.prompt_variant not in templates:
        raise ValueError(f"unknown prompt variant: {args.prompt_variant!r}")
    embed_cfg = (
        config_from_env(dim=args.dim)
        if args.embedder_backend == "remote_http"
        else EmbedderConfig(backend="local_hashed", dim=args.dim)
    )
    return PipelineConfig(
        embedder=embed_cfg,
        retriever=RetrieverConfig(k=args.k),
        llm=LlmConfig(
            backend=args.llm_backend,
            model_name=args.model,
            temperature=args.temperature,
            max_output_tokens=args.max_output_tokens,
            canned_text=args.canned_text,
        ),
        template=templates[args.prompt_variant],
        shots=shots,
        budget_words=args.budget_words,
    )


def cmd_ingest(args) -> int:
    cfg = ingest.SegmenterConfig(
        n_words=args.n_words,
        strategy=args.strategy,
        fixed_chunk_words=args.fixed_chunk_words,
        fixed_overlap_words=args.fixed_overlap_words,
    )
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory does not exist: {input_dir}")
    chunks: list[ingest.Chunk] = []
    documents = 0
    for path in sorted(input_dir.iterdir()):
        if path.suffix == ".docx":
            fmt = "docx"
        elif path.suffix in (".txt", ".md"):
            fmt = "structured_text"
        else:
            continue
        doc = ingest.extract_document(
            path.read_bytes(), fmt, spec_id=path.stem, title=path.stem
        )
        doc = ingest.preprocess(doc)
        chunks.extend(ingest.segment(doc, cfg))
        documents += 1
    if documents == 0:
        raise ValueError(f"no .docx/.txt/.md documents under {input_dir}")
    ingest.write_corpus(chunks, args.out)
    print(f"ingested {documents} documents into {len(chunks)} chunks -> {args.out}")
    return 0


def cmd_index(args) -> int:
    chunks = ingest.read_corpus(args.corpus)
    if not chunks:
        raise ValueError(f"corpus is empty: {args.corpus}")
    if args.embedder == "remote":
        embed_cfg = config_from_env(dim=args.dim, model_name=args.model_name)
        if embed_cfg.backend != "remote_http":
            raise ValueError("remote embedder requires EMBED_BASE_URL")
    else:
        embed_cfg = EmbedderConfig(backend="local_hashed", dim=args.dim)
    vectors = embed_batch([c.text for c in chunks], embed_cfg)
    index = VectorIndex.build(
        [IndexEntry(chunk_id=c.chunk_id, vector=v) for c, v in zip(chunks, vectors)],
        embed_cfg.dim,
    )
    index.save(args.out)
    print(f"indexed {len(index)} chunks (dim {embed_cfg.dim}) -> {args.out}")
    return 0


def cmd_query(args) -> int:
    assistant = Assistant.from_files(args.corpus, args.index, _pipeline_config(args))
    session = Session(session_id="cli")
    record = assistant.answer(session, args.question)
    print(record.response_text)
    print()
    for citation, score in zip(record.citations, record.scores):
        print(f"  [{score:.4f}] {citation}")
    return 0


def cmd_eval(args) -> int:
    dataset = harness.load_benchmark(args.benchmark)
    chunks = ingest.read_corpus(args.corpus)
    index = VectorIndex.load(args.index)
    cfg = _pipeline_config(args)
    report = harness.run_benchmark(
        dataset, {c.chunk_id: c for c in chunks}, index, cfg
    )
    harness.save_report(report, args.report)
    print(harness.render_table([("run", report.aggregates)]))
    print(f"report -> {args.report}")
    return 0


def cmd_ablate(args) -> int:
    dataset = harness.load_benchmark(args.benchmark)
    chunks = ingest.read_corpus(args.corpus)
    index = VectorIndex.load(args.index)
    cfg = _pipeline_config(args)

    documents = None
    if args.input_dir:
        documents = []
        for path in sorted(Path(args.input_dir).iterdir()):
            if path.suffix == ".docx":
                fmt = "docx"
            elif path.suffix in (".txt", ".md"):
                fmt = "structured_text"
            else:
                continue
            doc = ingest.extract_document(
                path.read_bytes(), fmt, spec_id=path.stem, title=path.stem
            )
            documents.append(ingest.preprocess(doc))

    templates = dict(BUILTIN_TEMPLATES)
    if args.prompt_config:
        templates, _ = load_prompt_config(args.prompt_config)
    env = harness.AblationEnv(
        chunks=chunks,
        index=index,
        cfg=cfg,
        documents=documents,
        templates=templates,
    )
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if args.axis == "k":
        values = [int(v) for v in values]
    results = harness.run_ablation(args.axis, values, dataset, env)

    rows = [(f"{args.axis}={value}", report.aggregates) for value, report in results]
    print(harness.render_table(rows, label=args.axis))
    if args.report_dir:
        report_dir = Path(args.report_dir)
        report_dir.mkdir(parents=True, exist_ok=True)
        for value, report in results:
            harness.save_report(report, report_dir / f"{args.axis}_{value}.json")
        print(f"reports -> {report_dir}")
    return 0


def cmd_resolve(args) -> int:
    registry = fb.ExpertRegistry.from_file(args.experts_file)
    queue = fb.RequestQueue(args.queue_dir)
    cfg = PipelineConfig(embedder=EmbedderConfig(backend="local_hashed", dim=args.dim))
    assistant = Assistant.from_files(args.corpus, args.index, cfg)
    text = Path(args.text_file).read_text(encoding="utf-8")
    chunks = fb.resolve_expert_request(
        args.request, args.expert, text, queue, registry, assistant
    )
    print(f"resolved {args.request}: {len(chunks)} chunk(s) added, index rebuilt")
    return 0


def cmd_serve(args) -> int:
    cfg = ServiceConfig.from_toml(args.config)
    print(f"serving on {cfg.bind_address}:{cfg.port}")
    serve(cfg)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
