"""Lexical and embedding-based response quality metrics, from scratch.

Tokenization for every lexical metric is lowercase + split on
non-alphanumeric, with no stemming or stopword removal. BLEU smoothing is
add-epsilon (1e-9) on zero or empty n-gram precisions. Both choices move
third-decimal scores, so every report records them in its config snapshot.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .embedder import EmbedderConfig, embed_batch
from .textproc import tokenize

BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Sentence-level BLEU with add-epsilon smoothing and brevity penalty.

    Intentionally asymmetric: precision is measured over the candidate.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        warnings.warn("bleu: empty token list, scoring 0", stacklevel=2)
        return 0.0

    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(cand, n)
        ref_counts = _ngrams(ref, n)
        total = sum(cand_counts.values())
        clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        if total == 0 or clipped == 0:
            p = (clipped + BLEU_EPSILON) / (total + BLEU_EPSILON)
        else:
            p = clipped / total
        log_sum += math.log(p)
    geometric_mean = math.exp(log_sum / max_n)

    c, r = len(cand), len(ref)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * geometric_mean


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap F-measure."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if len(ref) < n or not cand:
        warnings.warn(f"rouge_{n}: too few tokens, scoring 0", stacklevel=2)
        return RougeScore(0.0, 0.0, 0.0)
    cand_counts = _ngrams(cand, n)
    ref_counts = _ngrams(ref, n)
    overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence F-measure over token sequences."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        warnings.warn("rouge_l: empty token list, scoring 0", stacklevel=2)
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Rolling single-row DP; len(b)+1 ints.
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


TokenEmbedder = Callable[[str], np.ndarray]


def make_token_embedder(cfg: EmbedderConfig) -> TokenEmbedder:
    """Per-token embedder with a small cache; tokens repeat heavily."""
    cache: dict[str, np.ndarray] = {}

    def embed_token(token: str) -> np.ndarray:
        if token not in cache:
            cache[token] = embed_batch([token], cfg)[0]
        return cache[token]

    return embed_token


def bertscore_f1(
    candidate: str, reference: str, token_embedder: TokenEmbedder
) -> float:
    """Greedy-matching token-embedding similarity F1.

    Recall is the mean over reference tokens of the best cosine against any
    candidate token; precision is symmetric. With a per-token hashed
    embedder this reduces to soft unigram overlap; a contextual
    token-embedding backend recovers the published behavior.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        warnings.warn("bertscore: empty token list, scoring 0", stacklevel=2)
        return 0.0
    cand_matrix = _unit_rows(np.vstack([token_embedder(t) for t in cand]))
    ref_matrix = _unit_rows(np.vstack([token_embedder(t) for t in ref]))
    similarity = ref_matrix @ cand_matrix.T
    recall = float(np.mean(np.max(similarity, axis=1)))
    precision = float(np.mean(np.max(similarity, axis=0)))
    return _f1(precision, recall)


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / norms


def response_cosine(candidate: str, reference: str, cfg: EmbedderConfig) -> float:
    """Cosine similarity of whole-response embeddings."""
    vec_c, vec_r = embed_batch([candidate, reference], cfg)
    denom = float(np.linalg.norm(vec_c) * np.linalg.norm(vec_r))
    return float(np.dot(vec_c, vec_r) / denom)
