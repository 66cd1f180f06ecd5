"""Retrieval-grounded question answering over technical specification corpora."""

from .embedder import EmbedderConfig, embed_batch, embed_query
from .harness import BenchmarkItem, MetricReport, run_ablation, run_benchmark
from .ingest import (
    Chunk,
    RawDocument,
    RawSection,
    SegmenterConfig,
    extract_document,
    preprocess,
    read_corpus,
    segment,
    write_corpus,
)
from .llm import Completion, LlmConfig, complete
from .metrics import bertscore_f1, bleu, response_cosine, rouge_l, rouge_n
from .pipeline import AnswerRecord, Assistant, PipelineConfig, Session, answer
from .prompting import AssembledPrompt, FewShotExample, PromptTemplate, assemble
from .vector_index import IndexEntry, RetrieverConfig, SearchResult, VectorIndex

__version__ = "0.1.0"

__all__ = [
    "AnswerRecord",
    "AssembledPrompt",
    "Assistant",
    "BenchmarkItem",
    "Chunk",
    "Completion",
    "EmbedderConfig",
    "FewShotExample",
    "IndexEntry",
    "LlmConfig",
    "MetricReport",
    "PipelineConfig",
    "PromptTemplate",
    "RawDocument",
    "RawSection",
    "RetrieverConfig",
    "SearchResult",
    "SegmenterConfig",
    "Session",
    "VectorIndex",
    "answer",
    "assemble",
    "bertscore_f1",
    "bleu",
    "complete",
    "embed_batch",
    "embed_query",
    "extract_document",
    "preprocess",
    "read_corpus",
    "response_cosine",
    "rouge_l",
    "rouge_n",
    "run_ablation",
    "run_benchmark",
    "segment",
    "write_corpus",
]
