"""Flat exact cosine-similarity index over chunk embeddings.

The corpus is small enough that an exact scan beats any approximate
structure on simplicity and determinism: every search is reproducible and
testable against a brute-force oracle. Scores are exact cosine similarity;
ties break by ascending chunk id.

On-disk format ("SSIX"): little-endian header
    magic "SSIX" | version u32 | dim u32 | count u64 | metric u8 (1=cosine)
followed by count records of
    chunk_id_len u16 | chunk_id utf-8 | dim * float32.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAGIC = b"SSIX"
VERSION = 1
METRIC_COSINE = 1

_HEADER = struct.Struct("<4sIIQB")


class IndexFormatError(ValueError):
    """Index file is not a readable SSIX file."""


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class SearchResult:
    chunk_id: str
    score: float


@dataclass(frozen=True)
class RetrieverConfig:
    k: int = 3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


class VectorIndex:
    """Immutable flat index; build once, search concurrently."""

    def __init__(self, chunk_ids: Sequence[str], matrix: np.ndarray):
        self._chunk_ids = list(chunk_ids)
        self._matrix = matrix.astype(np.float32, copy=False)
        self._norms = np.linalg.norm(self._matrix.astype(np.float64), axis=1)

    @classmethod
    def build(cls, entries: Iterable[IndexEntry], dim: int) -> "VectorIndex":
        entries = list(entries)
        seen: set[str] = set()
        vectors = []
        ids = []
        for entry in entries:
            if entry.chunk_id in seen:
                raise ValueError(f"duplicate chunk_id: {entry.chunk_id!r}")
            seen.add(entry.chunk_id)
            vector = np.asarray(entry.vector, dtype=np.float64)
            if vector.shape != (dim,):
                raise ValueError(
                    f"vector for {entry.chunk_id!r} has dim {vector.shape}, expected ({dim},)"
                )
            if not np.all(np.isfinite(vector)):
                raise ValueError(f"vector for {entry.chunk_id!r} has non-finite values")
            if float(np.linalg.norm(vector)) == 0.0:
                raise ValueError(f"vector for {entry.chunk_id!r} is the zero vector")
            ids.append(entry.chunk_id)
            vectors.append(vector.astype(np.float32))
        matrix = (
            np.vstack(vectors) if vectors else np.zeros((0, dim), dtype=np.float32)
        )
        return cls(ids, matrix)

    def __len__(self) -> int:
        return len(self._chunk_ids)

    @property
    def dim(self) -> int:
        return int(self._matrix.shape[1])

    def entries(self) -> list[IndexEntry]:
        return [
            IndexEntry(chunk_id=cid, vector=self._matrix[i].copy())
            for i, cid in enumerate(self._chunk_ids)
        ]

    def search(self, query: np.ndarray, cfg: RetrieverConfig) -> list[SearchResult]:
        """Top-k by exact cosine, descending; ties by ascending chunk id."""
        if len(self._chunk_ids) == 0:
            raise ValueError("empty index")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dim,):
            raise ValueError(f"query has dim {query.shape}, index dim is {self.dim}")
        qnorm = float(np.linalg.norm(query))
        if qnorm == 0.0:
            raise ValueError("query is the zero vector")
        scores = (self._matrix.astype(np.float64) @ query) / (self._norms * qnorm)
        order = sorted(
            range(len(self._chunk_ids)),
            key=lambda i: (-scores[i], self._chunk_ids[i]),
        )
        k = min(cfg.k, len(order))
        return [
            SearchResult(chunk_id=self._chunk_ids[i], score=float(scores[i]))
            for i in order[:k]
        ]

    # -- persistence ---------------------------------------------------

    def save(self, path: Path | str) -> None:
        with open(path, "wb") as fh:
            fh.write(
                _HEADER.pack(MAGIC, VERSION, self.dim, len(self._chunk_ids), METRIC_COSINE)
            )
            for cid, row in zip(self._chunk_ids, self._matrix):
                encoded = cid.encode("utf-8")
                fh.write(struct.pack("<H", len(encoded)))
                fh.write(encoded)
                fh.write(row.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: Path | str) -> "VectorIndex":
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            if len(header) < _HEADER.size:
                raise IndexFormatError(f"{path}: truncated header")
            magic, version, dim, count, metric = _HEADER.unpack(header)
            if magic != MAGIC:
                raise IndexFormatError(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise IndexFormatError(f"{path}: unsupported version {version}")
            if metric != METRIC_COSINE:
                raise IndexFormatError(f"{path}: unsupported metric {metric}")
            ids = []
            rows = []
            for _ in range(count):
                (id_len,) = struct.unpack("<H", fh.read(2))
                ids.append(fh.read(id_len).decode("utf-8"))
                data = fh.read(4 * dim)
                if len(data) < 4 * dim:
                    raise IndexFormatError(f"{path}: truncated record")
                rows.append(np.frombuffer(data, dtype="<f4"))
            matrix = (
                np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
            )
            return cls(ids, matrix)


def brute_force_top_k(
    entries: Sequence[IndexEntry], query: np.ndarray, k: int
) -> list[SearchResult]:
    """Independent full-scan oracle with the same tie rule as the index.

    Entry vectors pass through float32 first because that is what the index
    format stores. Scores use the same matrix-product primitive as the
    index: mathematically tied entries must round identically on both
    sides, or last-bit noise would defeat the chunk-id tie rule. The oracle
    independently rebuilds the matrix, norms, ranking, and tie-breaking.
    """
    query = np.asarray(query, dtype=np.float64)
    qnorm = float(np.linalg.norm(query))
    matrix = np.vstack(
        [np.asarray(e.vector, dtype=np.float32).astype(np.float64) for e in entries]
    )
    scores = (matrix @ query) / (np.linalg.norm(matrix, axis=1) * qnorm)
    scored = [
        SearchResult(chunk_id=e.chunk_id, score=float(s))
        for e, s in zip(entries, scores)
    ]
    scored.sort(key=lambda r: (-r.score, r.chunk_id))
    return scored[: min(k, len(scored))]
