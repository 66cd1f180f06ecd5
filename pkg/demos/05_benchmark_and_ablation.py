"""Score the pipeline on a constructed benchmark and sweep the k axis.

References are verbatim chunk bodies, so with the echo mock a correct
retrieval scores near 1.0 on the lexical metrics: the benchmark measures
the retrieval pipeline, not a language model.

Run from the repository root:

    python3 demos/05_benchmark_and_ablation.py
"""

from pathlib import Path

from specsynth import BenchmarkItem, LlmConfig, PipelineConfig, SegmenterConfig
from specsynth import extract_document, preprocess, segment, run_benchmark, run_ablation
from specsynth.harness import AblationEnv, build_index_from_chunks, render_table

DATA = Path(__file__).parent / "data"

documents = []
chunks = []
for path in sorted(DATA.glob("*.txt")):
    doc = preprocess(
        extract_document(path.read_bytes(), "structured_text", spec_id=path.stem)
    )
    documents.append(doc)
    chunks.extend(segment(doc, SegmenterConfig(n_words=120)))

cfg = PipelineConfig(llm=LlmConfig(backend="mock_echo_context"))
index = build_index_from_chunks(chunks, cfg.embedder)
corpus = {c.chunk_id: c for c in chunks}

dataset = [
    BenchmarkItem(
        item_id=chunk.chunk_id,
        query=chunk.text,
        reference_response=chunk.body().strip(),
        source_spec=chunk.spec_id,
    )
    for chunk in chunks
]

report = run_benchmark(dataset, corpus, index, cfg, SegmenterConfig(n_words=120))
print(render_table([("echo oracle", report.aggregates)]))
print()

results = run_ablation("k", [1, 2, 3], dataset, AblationEnv(
    chunks=chunks, index=index, cfg=cfg, documents=documents,
))
print(render_table([(f"k={value}", r.aggregates) for value, r in results], label="k"))
print()
print("On this benchmark every query is a verbatim chunk, so rank 1 is always")
print("right and extra contexts only dilute the echoed answer: k=1 wins. With")
print("imperfect queries (where the right chunk ranks 2-3) larger k wins, which")
print("is what the acceptance fixture's decoy benchmark exercises.")
print()
print("snapshot of the k=1 run:", results[0][1].config_snapshot["k"])
