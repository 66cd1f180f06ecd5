"""Multi-turn conversation against the corpus with an offline mock model.

The echo mock stands in for a hosted model: it returns the retrieved
context verbatim, so you can see exactly what a real model would have been
grounded on. Point LlmConfig at a chat-completions endpoint to use one.

Run from the repository root:

    python3 demos/03_conversational_answering.py
"""

from pathlib import Path

from specsynth import LlmConfig, PipelineConfig, SegmenterConfig, extract_document, preprocess, segment
from specsynth.harness import build_index_from_chunks
from specsynth.pipeline import Assistant

DATA = Path(__file__).parent / "data"

chunks = []
for path in sorted(DATA.glob("*.txt")):
    doc = preprocess(
        extract_document(path.read_bytes(), "structured_text", spec_id=path.stem)
    )
    chunks.extend(segment(doc, SegmenterConfig(n_words=120)))

cfg = PipelineConfig(llm=LlmConfig(backend="mock_echo_context"))
assistant = Assistant(chunks, build_index_from_chunks(chunks, cfg.embedder), cfg)

session = assistant.sessions.create()
for query in (
    "what happens during initial registration",
    "and what if the update timer expires",
):
    record = assistant.answer(session, query)
    print(f"Q: {query}")
    print(f"A: {record.response_text[:300]}...")
    print("cited:")
    for citation, score in zip(record.citations, record.scores):
        print(f"  [{score:+.4f}] {citation}")
    print()

print(f"session now holds {len(session.turns)} turns;")
print("the second answer was assembled with the first turn as history.")
