"""Text-to-vector backends behind one interface.

local_hashed is a deterministic bag-of-words signed-hash embedder: it lets
the whole pipeline and test suite run with no external model while staying
cosine-comparable between corpus and query sides. remote_http speaks the
common embeddings REST shape so a hosted sentence-embedding model can be
plugged in without code changes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import transport
from .textproc import collapse_whitespace, tokenize

# 64-bit FNV-1a; two fixed seeds give two independent hash streams.
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
SEED_BUCKET = 0xCBF29CE484222325  # standard FNV-1a offset basis
SEED_SIGN = SEED_BUCKET ^ _MASK64


class UnembeddableTextError(ValueError):
    """Text produced the zero vector and cannot be compared by cosine."""


class EmbedderConfigError(ValueError):
    """Backend configuration is inconsistent with reality."""


@dataclass(frozen=True)
class EmbedderConfig:
    backend: str = "local_hashed"  # or "remote_http"
    dim: int = 384
    endpoint_url: str | None = None
    model_name: str | None = None
    batch_size: int = 32
    normalize: bool = True
    max_retries: int = 3
    retry_base_seconds: float = 1.0

    def __post_init__(self) -> None:
        if self.backend not in ("local_hashed", "remote_http"):
            raise EmbedderConfigError(f"unknown embedder backend: {self.backend!r}")
        if self.dim < 1:
            raise EmbedderConfigError("dim must be >= 1")
        if self.backend == "remote_http" and not self.endpoint_url:
            raise EmbedderConfigError("remote_http backend requires endpoint_url")


def fnv1a_64(data: bytes, seed: int) -> int:
    h = seed
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def token_hash(data: bytes, seed: int) -> int:
    """FNV-1a folded with an xor-shift so its low bits are usable.

    Raw FNV-1a's lowest bit reduces to the xor of input byte parities,
    identically for every seed; without the fold the bucket and sign
    streams would correlate (same bucket would force same sign) and all
    bag-of-words vectors would skew positive against each other.
    """
    h = fnv1a_64(data, seed)
    return h ^ (h >> 33)


def embed_batch(texts: list[str], cfg: EmbedderConfig) -> list[np.ndarray]:
    """Embed texts in order; one vector per input.

    Query and corpus sides share this path, including the whitespace
    normalization, so their vectors live in the same space.
    """
    if not texts:
        raise ValueError("texts must be a non-empty list")
    prepared = []
    for i, text in enumerate(texts):
        clean = collapse_whitespace(text)
        if not clean:
            raise ValueError(f"text {i} is empty")
        prepared.append(clean)

    if cfg.backend == "local_hashed":
        return [_embed_hashed(text, cfg) for text in prepared]
    return _embed_remote(prepared, cfg)


def embed_query(text: str, cfg: EmbedderConfig) -> np.ndarray:
    return embed_batch([text], cfg)[0]


def _embed_hashed(text: str, cfg: EmbedderConfig) -> np.ndarray:
    # Integer accumulation keeps this bit-identical across platforms;
    # floats only appear at the final normalization.
    buckets = [0] * cfg.dim
    for token in tokenize(text):
        data = token.encode("utf-8")
        bucket = token_hash(data, SEED_BUCKET) % cfg.dim
        sign = 1 if token_hash(data, SEED_SIGN) % 2 == 0 else -1
        buckets[bucket] += sign
    vector = np.array(buckets, dtype=np.float64)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise UnembeddableTextError("unembeddable text")
    return vector / norm if cfg.normalize else vector


def _embed_remote(texts: list[str], cfg: EmbedderConfig) -> list[np.ndarray]:
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get("EMBED_API_KEY")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    vectors: list[np.ndarray | None] = [None] * len(texts)
    url = cfg.endpoint_url.rstrip("/") + "/embeddings"
    for start in range(0, len(texts), cfg.batch_size):
        batch = texts[start : start + cfg.batch_size]
        reply = transport.post_json(
            url,
            {"model": cfg.model_name, "input": batch},
            headers=headers,
            max_retries=cfg.max_retries,
            base_delay=cfg.retry_base_seconds,
        )
        try:
            items = reply["data"]
        except (KeyError, TypeError) as err:
            raise transport.ProtocolError(
                f"embeddings response missing 'data': {reply!r}"
            ) from err
        for item in items:
            vector = np.asarray(item["embedding"], dtype=np.float64)
            if vector.shape != (cfg.dim,):
                raise EmbedderConfigError(
                    f"remote returned dim {vector.shape[0]}, configured dim {cfg.dim}"
                )
            index = start + int(item["index"])
            if cfg.normalize:
                norm = float(np.linalg.norm(vector))
                if norm == 0.0:
                    raise UnembeddableTextError("unembeddable text")
                vector = vector / norm
            vectors[index] = vector
    if any(v is None for v in vectors):
        raise transport.ProtocolError("embeddings response left inputs unmatched")
    return vectors  # type: ignore[return-value]


def config_from_env(backend: str = "remote_http", **overrides) -> EmbedderConfig:
    """Build a remote config from EMBED_BASE_URL, falling back to local."""
    base_url = os.environ.get("EMBED_BASE_URL")
    if backend == "remote_http" and base_url:
        return EmbedderConfig(backend="remote_http", endpoint_url=base_url, **overrides)
    return EmbedderConfig(backend="local_hashed", **overrides)
