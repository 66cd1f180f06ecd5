"""Benchmark evaluation and single-axis ablation sweeps.

Every item runs in a fresh session so no conversation state bleeds between
queries. A per-item pipeline failure is recorded and scored zero; the run
continues. Aggregates are arithmetic means of the per-item columns, and
the report snapshot pins every scoring choice that could move a digit.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import metrics
from .embedder import EmbedderConfig, embed_batch
from .ingest import Chunk, RawDocument, SegmenterConfig, segment
from .pipeline import PipelineConfig, Session, answer
from .prompting import BUILTIN_TEMPLATES, PromptTemplate
from .vector_index import IndexEntry, RetrieverConfig, VectorIndex

METRIC_COLUMNS = ("bleu", "rouge1_f1", "rouge2_f1", "rougeL_f1", "bertscore_f1", "cosine_sim")
ABLATION_AXES = ("k", "prompt_variant", "segmentation", "model", "embedder")


@dataclass(frozen=True)
class BenchmarkItem:
    item_id: str
    query: str
    reference_response: str
    source_spec: str | None = None

    def __post_init__(self) -> None:
        if not self.query or not self.reference_response:
            raise ValueError("query and reference_response must be non-empty")


@dataclass
class ItemScores:
    item_id: str
    bleu: float
    rouge1_f1: float
    rouge2_f1: float
    rougeL_f1: float
    bertscore_f1: float
    cosine_sim: float
    error: str | None = None


@dataclass
class MetricReport:
    per_item: list[ItemScores]
    aggregates: dict[str, float]
    config_snapshot: dict


def load_benchmark(path: Path | str) -> list[BenchmarkItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            items.append(
                BenchmarkItem(
                    item_id=str(raw["item_id"]),
                    query=raw["query"],
                    reference_response=raw["reference_response"],
                    source_spec=raw.get("source_spec"),
                )
            )
    return items


def save_benchmark(items: Sequence[BenchmarkItem], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(dataclasses.asdict(item), ensure_ascii=False) + "\n")


def score_pair(
    candidate: str,
    reference: str,
    item_id: str,
    embed_cfg: EmbedderConfig,
    token_embedder: metrics.TokenEmbedder,
) -> ItemScores:
    return ItemScores(
        item_id=item_id,
        bleu=metrics.bleu(candidate, reference),
        rouge1_f1=metrics.rouge_n(candidate, reference, 1).f1,
        rouge2_f1=metrics.rouge_n(candidate, reference, 2).f1,
        rougeL_f1=metrics.rouge_l(candidate, reference).f1,
        bertscore_f1=metrics.bertscore_f1(candidate, reference, token_embedder),
        cosine_sim=metrics.response_cosine(candidate, reference, embed_cfg),
    )


def config_snapshot(
    cfg: PipelineConfig, segmenter: SegmenterConfig | None = None
) -> dict:
    snapshot = {
        "k": cfg.retriever.k,
        "temperature": cfg.llm.temperature,
        "max_output_tokens": cfg.llm.max_output_tokens,
        "budget_words": cfg.budget_words,
        "history_window": cfg.history_window,
        "model_name": cfg.llm.model_name,
        "llm_backend": cfg.llm.backend,
        "embedder_backend": cfg.embedder.backend,
        "embedder_dim": cfg.embedder.dim,
        "prompt_variant": cfg.template.variant_name,
        "tokenizer": "lowercase, split on non-alphanumeric",
        "bleu_smoothing": f"add-epsilon {metrics.BLEU_EPSILON}",
        "bleu_aggregation": "mean of sentence-level BLEU",
        "rouge_stemming": "none",
        "bertscore_rescaling": "none",
    }
    if segmenter is not None:
        snapshot["n_words"] = segmenter.n_words
        snapshot["segmentation_strategy"] = segmenter.strategy
    return snapshot


def run_benchmark(
    dataset: Sequence[BenchmarkItem],
    corpus: dict[str, Chunk],
    index: VectorIndex,
    cfg: PipelineConfig,
    segmenter: SegmenterConfig | None = None,
) -> MetricReport:
    """Answer every item in a fresh session and score all six metrics."""
    if not dataset:
        raise ValueError("empty benchmark")
    token_embedder = metrics.make_token_embedder(cfg.embedder)
    per_item: list[ItemScores] = []
    for item in dataset:
        session = Session(session_id=f"bench-{item.item_id}")
        try:
            record = answer(item.query, session, corpus, index, cfg)
        except Exception as err:  # scored zero, run continues
            per_item.append(
                ItemScores(item.item_id, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, error=str(err))
            )
            continue
        per_item.append(
            score_pair(
                record.response_text,
                item.reference_response,
                item.item_id,
                cfg.embedder,
                token_embedder,
            )
        )
    aggregates = {
        column: sum(getattr(row, column) for row in per_item) / len(per_item)
        for column in METRIC_COLUMNS
    }
    return MetricReport(
        per_item=per_item,
        aggregates=aggregates,
        config_snapshot=config_snapshot(cfg, segmenter),
    )


def save_report(report: MetricReport, path: Path | str) -> None:
    payload = {
        "per_item": [dataclasses.asdict(row) for row in report.per_item],
        "aggregates": report.aggregates,
        "config_snapshot": report.config_snapshot,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


_TABLE_HEADERS = ("BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "BERTScore", "Cosine Similarity")


def render_table(rows: list[tuple[str, dict[str, float]]], label: str = "Config") -> str:
    """Fixed-width comparison table, one row per configuration."""
    width = max(len(label), *(len(name) for name, _ in rows)) + 2
    header = label.ljust(width) + "".join(h.rjust(19) for h in _TABLE_HEADERS)
    lines = [header, "-" * len(header)]
    for name, aggregates in rows:
        cells = "".join(
            f"{aggregates[column]:19.4f}" for column in METRIC_COLUMNS
        )
        lines.append(name.ljust(width) + cells)
    return "\n".join(lines)


def build_index_from_chunks(
    chunks: Sequence[Chunk], embed_cfg: EmbedderConfig
) -> VectorIndex:
    vectors = embed_batch([c.text for c in chunks], embed_cfg)
    entries = [
        IndexEntry(chunk_id=c.chunk_id, vector=v) for c, v in zip(chunks, vectors)
    ]
    return VectorIndex.build(entries, embed_cfg.dim)


@dataclass
class AblationEnv:
    """Everything an ablation sweep may need to rebuild per value."""

    chunks: list[Chunk]
    index: VectorIndex
    cfg: PipelineConfig
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    documents: list[RawDocument] | None = None
    templates: dict[str, PromptTemplate] = field(
        default_factory=lambda: dict(BUILTIN_TEMPLATES)
    )


def run_ablation(
    axis: str,
    values: Sequence,
    dataset: Sequence[BenchmarkItem],
    env: AblationEnv,
) -> list[tuple[str, MetricReport]]:
    """One full benchmark run per axis value, all else held fixed.

    Every value is validated before the first run starts, so a bad value
    costs nothing.
    """
    if axis not in ABLATION_AXES:
        raise ValueError(f"unknown ablation axis: {axis!r}")
    _validate_axis_values(axis, values, env)

    results: list[tuple[str, MetricReport]] = []
    for value in values:
        corpus_chunks, index, cfg, segmenter = _apply_axis(axis, value, env)
        corpus = {c.chunk_id: c for c in corpus_chunks}
        report = run_benchmark(dataset, corpus, index, cfg, segmenter)
        results.append((str(value), report))
    return results


def _validate_axis_values(axis: str, values: Sequence, env: AblationEnv) -> None:
    if not values:
        raise ValueError("no ablation values given")
    if axis == "k":
        for value in values:
            RetrieverConfig(k=int(value))
    elif axis == "prompt_variant":
        unknown = [v for v in values if v not in env.templates]
        if unknown:
            raise ValueError(f"unknown prompt variants: {unknown}")
    elif axis == "segmentation":
        bad = [v for v in values if v not in ("section_aware", "fixed_overlap")]
        if bad:
            raise ValueError(f"unknown segmentation strategies: {bad}")
        if env.documents is None:
            raise ValueError("segmentation ablation needs the raw documents")
    elif axis == "model":
        if any(not str(v) for v in values):
            raise ValueError("model names must be non-empty")
    elif axis == "embedder":
        for value in values:
            replace(env.cfg.embedder, backend=str(value))


def _apply_axis(
    axis: str, value, env: AblationEnv
) -> tuple[list[Chunk], VectorIndex, PipelineConfig, SegmenterConfig]:
    chunks, index, segmenter = env.chunks, env.index, env.segmenter
    cfg = env.cfg
    if axis == "k":
        cfg = replace(cfg, retriever=RetrieverConfig(k=int(value)))
    elif axis == "prompt_variant":
        cfg = replace(cfg, template=env.templates[value])
    elif axis == "model":
        cfg = replace(cfg, llm=replace(cfg.llm, model_name=str(value)))
    elif axis == "embedder":
        embed_cfg = replace(cfg.embedder, backend=str(value))
        cfg = replace(cfg, embedder=embed_cfg)
        index = build_index_from_chunks(chunks, embed_cfg)
    elif axis == "segmentation":
        segmenter = replace(env.segmenter, strategy=str(value))
        chunks = [
            chunk for doc in env.documents for chunk in segment(doc, segmenter)
        ]
        index = build_index_from_chunks(chunks, cfg.embedder)
    return chunks, index, cfg, segmenter
