"""The human-in-the-loop path: verdicts, an assistance request, a resolution.

Run from the repository root:

    python3 demos/04_expert_feedback_loop.py
"""

import tempfile
import time
from pathlib import Path

from specsynth import LlmConfig, PipelineConfig, SegmenterConfig, extract_document, preprocess, segment
from specsynth.feedback import (
    ExpertRegistry,
    FeedbackLog,
    FeedbackRecord,
    RequestQueue,
    create_expert_request,
    record_feedback,
    resolve_expert_request,
)
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

with tempfile.TemporaryDirectory() as tmp:
    queue = RequestQueue(Path(tmp) / "requests")
    log = FeedbackLog(Path(tmp) / "feedback.log")
    registry = ExpertRegistry({"expert-7"})

    session = assistant.sessions.create()
    record = assistant.answer(session, "which handover thresholds should I configure")
    print("answer cited:", record.citations)

    # The user disliked the answer...
    record_feedback(
        log,
        FeedbackRecord(session.session_id, 0, "dislike", time.time()),
        session,
    )
    print("verdicts on file:", log.verdicts())

    # ...and asked for an expert. Offline, the request lands in the queue;
    # with ISSUES_API_URL set it is mirrored as a tracker issue too.
    request = create_expert_request(record, assistant.corpus, queue)
    print("request queued:", request.request_id, "status:", request.status)

    before = len(assistant.index)
    new_chunks = resolve_expert_request(
        request.request_id,
        "expert-7",
        "Handover thresholds trade ping-pong handovers against delayed "
        "handovers. Start from the coverage overlap measured in drive tests "
        "and widen the hysteresis until ping-pong rates flatten.",
        queue,
        registry,
        assistant,
    )
    print(f"resolved: +{len(new_chunks)} chunk(s), index {before} -> {len(assistant.index)}")

    followup = assistant.answer(
        assistant.sessions.create(), "handover threshold hysteresis ping-pong"
    )
    print("follow-up now cites:", followup.citations[0])
