"""Embed a corpus with the deterministic local backend and search it.

Run from the repository root:

    python3 demos/02_embed_and_search.py
"""

import tempfile
from pathlib import Path

from specsynth import (
    EmbedderConfig,
    IndexEntry,
    RetrieverConfig,
    SegmenterConfig,
    VectorIndex,
    embed_batch,
    embed_query,
    extract_document,
    preprocess,
    segment,
)

DATA = Path(__file__).parent / "data"

chunks = []
for path in sorted(DATA.glob("*.txt")):
    doc = preprocess(
        extract_document(path.read_bytes(), "structured_text", spec_id=path.stem)
    )
    chunks.extend(segment(doc, SegmenterConfig(n_words=120)))
print(f"corpus: {len(chunks)} chunks")

cfg = EmbedderConfig()  # local_hashed, dim 384, normalized
vectors = embed_batch([c.text for c in chunks], cfg)
index = VectorIndex.build(
    [IndexEntry(chunk_id=c.chunk_id, vector=v) for c, v in zip(chunks, vectors)],
    cfg.dim,
)

by_id = {c.chunk_id: c for c in chunks}
for query in (
    "how does a device register with the network",
    "sounding reference signal channel estimation",
    "guaranteed bit rate and packet delay budget",
):
    print(f"\nquery: {query}")
    for result in index.search(embed_query(query, cfg), RetrieverConfig(k=3)):
        print(f"  {result.score:+.4f}  {by_id[result.chunk_id].source}")

# The index round-trips through its binary file byte-exactly.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.ssix"
    index.save(path)
    reloaded = VectorIndex.load(path)
    print(f"\nsaved and reloaded index: {len(reloaded)} entries, dim {reloaded.dim}")
