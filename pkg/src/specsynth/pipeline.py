"""Per-query orchestration: embed, retrieve, assemble, complete, cite.

Citations come from retrieval metadata, never parsed back out of the model
text: the model is prompted to cite, but the authoritative source list is
whatever was actually retrieved.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import embedder, ingest, llm, prompting, vector_index
from .transport import ProtocolError, TransportError


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for callers."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Turn:
    query: str
    response: str
    context_ids: list[str]
    timestamp: float


@dataclass
class Session:
    session_id: str
    turns: list[Turn] = field(default_factory=list)


@dataclass(frozen=True)
class AnswerRecord:
    query: str
    response_text: str
    citations: list[str]
    context_ids: list[str]
    scores: list[float]
    prompt_words: int
    model_name: str


@dataclass
class PipelineConfig:
    embedder: embedder.EmbedderConfig = field(default_factory=embedder.EmbedderConfig)
    retriever: vector_index.RetrieverConfig = field(
        default_factory=vector_index.RetrieverConfig
    )
    llm: llm.LlmConfig = field(default_factory=llm.LlmConfig)
    template: prompting.PromptTemplate = field(
        default_factory=lambda: prompting.BUILTIN_TEMPLATES["default"]
    )
    shots: list[prompting.FewShotExample] = field(default_factory=list)
    budget_words: int = 3000
    history_window: int = 3


def answer(
    query: str,
    session: Session,
    corpus: dict[str, ingest.Chunk],
    index: vector_index.VectorIndex,
    cfg: PipelineConfig,
) -> AnswerRecord:
    """Answer one query within a session, appending the turn on success."""
    query = query.strip()
    if not query:
        raise ValueError("empty query")

    try:
        query_vector = embedder.embed_query(query, cfg.embedder)
    except (TransportError, ProtocolError, embedder.UnembeddableTextError) as err:
        raise StageError("embed", err) from err

    try:
        results = index.search(query_vector, cfg.retriever)
    except ValueError as err:
        raise StageError("retrieve", err) from err

    contexts = [corpus[r.chunk_id] for r in results]
    prompt = prompting.assemble(
        query,
        contexts,
        history=[(t.query, t.response) for t in session.turns],
        template=cfg.template,
        shots=cfg.shots,
        budget_words=cfg.budget_words,
        history_window=cfg.history_window,
    )

    try:
        completion = llm.complete(prompt, cfg.llm)
    except (TransportError, ProtocolError) as err:
        raise StageError("complete", err) from err

    session.turns.append(
        Turn(
            query=query,
            response=completion.text,
            context_ids=[r.chunk_id for r in results],
            timestamp=time.time(),
        )
    )
    return AnswerRecord(
        query=query,
        response_text=completion.text,
        citations=[c.source for c in contexts],
        context_ids=[r.chunk_id for r in results],
        scores=[r.score for r in results],
        prompt_words=completion.prompt_words,
        model_name=cfg.llm.model_name,
    )


class SessionStore:
    """In-memory sessions with optional JSONL persistence per session."""

    def __init__(self, persist_dir: Path | str | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._persist_dir = Path(persist_dir) if persist_dir else None
        if self._persist_dir:
            self._persist_dir.mkdir(parents=True, exist_ok=True)

    def create(self) -> Session:
        session = Session(session_id=uuid.uuid4().hex)
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(f"unknown session: {session_id}")
            return self._sessions[session_id]

    def record_turn(self, session: Session) -> None:
        if not self._persist_dir or not session.turns:
            return
        turn = session.turns[-1]
        path = self._persist_dir / f"{session.session_id}.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "query": turn.query,
                        "response": turn.response,
                        "context_ids": turn.context_ids,
                        "timestamp": turn.timestamp,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


class Assistant:
    """Corpus + index + configs bundled behind the answer/extend API.

    Index rebuilds triggered by expert additions swap the index reference
    atomically; in-flight searches finish on the old index.
    """

    def __init__(
        self,
        chunks: list[ingest.Chunk],
        index: vector_index.VectorIndex,
        cfg: PipelineConfig,
        sessions: SessionStore | None = None,
        corpus_path: Path | str | None = None,
        index_path: Path | str | None = None,
    ):
        self.chunks = list(chunks)
        self.corpus = {c.chunk_id: c for c in self.chunks}
        self.index = index
        self.cfg = cfg
        self.sessions = sessions or SessionStore()
        self.corpus_path = Path(corpus_path) if corpus_path else None
        self.index_path = Path(index_path) if index_path else None
        self._rebuild_lock = threading.Lock()

    @classmethod
    def from_files(
        cls,
        corpus_path: Path | str,
        index_path: Path | str,
        cfg: PipelineConfig,
        sessions: SessionStore | None = None,
    ) -> "Assistant":
        chunks = ingest.read_corpus(corpus_path)
        index = vector_index.VectorIndex.load(index_path)
        return cls(chunks, index, cfg, sessions, corpus_path, index_path)

    def answer(self, session: Session, query: str) -> AnswerRecord:
        record = answer(query, session, self.corpus, self.index, self.cfg)
        self.sessions.record_turn(session)
        return record

    def add_expert_text(self, text: str, expert_id: str) -> list[ingest.Chunk]:
        """Segment, embed, and index an expert contribution atomically."""
        with self._rebuild_lock:
            new_chunks = ingest.segment_expert_text(
                text,
                expert_id,
                cfg=ingest.SegmenterConfig(),
                ordinal_base=len(self.chunks),
            )
            vectors = embedder.embed_batch([c.text for c in new_chunks], self.cfg.embedder)
            entries = self.index.entries() + [
                vector_index.IndexEntry(chunk_id=c.chunk_id, vector=v)
                for c, v in zip(new_chunks, vectors)
            ]
            new_index = vector_index.VectorIndex.build(entries, self.cfg.embedder.dim)

            self.chunks.extend(new_chunks)
            for chunk in new_chunks:
                self.corpus[chunk.chunk_id] = chunk
            self.index = new_index

            if self.corpus_path:
                ingest.append_corpus(new_chunks, self.corpus_path)
            if self.index_path:
                new_index.save(self.index_path)
        return new_chunks
