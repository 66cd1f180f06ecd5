"""HTTP surface for the chat UI and external clients.

Plain JSON over HTTP, no streaming: responses are short and the evaluation
harness wants whole responses anyway. Queries within one session are
serialized; different sessions run concurrently against a shared read-only
index that expert additions replace atomically.
"""

from __future__ import annotations

import sys
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import feedback as fb
from .embedder import EmbedderConfig
from .llm import LlmConfig
from .pipeline import Assistant, PipelineConfig, SessionStore, StageError
from .prompting import BUILTIN_TEMPLATES, load_prompt_config
from .vector_index import RetrieverConfig

DEFAULT_DISCLAIMER = (
    "We do not recommend fully automated systems based solely on the "
    "outputs of this tool; it is important that humans are still in the "
    "loop to correct any mistakes that the system may make."
)


@dataclass
class ServiceConfig:
    corpus_path: str
    index_path: str
    bind_address: str = "127.0.0.1"
    port: int = 8080
    disclaimer_text: str = DEFAULT_DISCLAIMER
    cors_origins: list[str] = field(default_factory=list)
    embedder_backend: str = "local_hashed"
    embedder_dim: int = 384
    embedder_endpoint_url: str | None = None
    embedder_model_name: str | None = None
    k: int = 3
    llm_backend: str = "remote_http"
    llm_endpoint_url: str | None = None
    model_name: str = "gpt-4"
    temperature: float = 0.0
    max_output_tokens: int = 1000
    llm_max_retries: int = 3
    llm_retry_base_seconds: float = 1.0
    canned_text: str = ""
    budget_words: int = 3000
    history_window: int = 3
    prompt_variant: str = "default"
    prompt_config_path: str | None = None
    feedback_log_path: str = "feedback.log"
    request_queue_dir: str = "requests"
    session_dir: str | None = None
    issues_api_url: str | None = None
    issues_token: str | None = None

    @classmethod
    def from_toml(cls, path: Path | str) -> "ServiceConfig":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls(**raw)

    def pipeline_config(self) -> PipelineConfig:
        templates = dict(BUILTIN_TEMPLATES)
        shots = []
        if self.prompt_config_path:
            templates, shots = load_prompt_config(self.prompt_config_path)
        return PipelineConfig(
            embedder=EmbedderConfig(
                backend=self.embedder_backend,
                dim=self.embedder_dim,
                endpoint_url=self.embedder_endpoint_url,
                model_name=self.embedder_model_name,
            ),
            retriever=RetrieverConfig(k=self.k),
            llm=LlmConfig(
                backend=self.llm_backend,
                endpoint_url=self.llm_endpoint_url,
                model_name=self.model_name,
                temperature=self.temperature,
                max_output_tokens=self.max_output_tokens,
                max_retries=self.llm_max_retries,
                retry_base_seconds=self.llm_retry_base_seconds,
                canned_text=self.canned_text,
            ),
            template=templates[self.prompt_variant],
            shots=shots,
            budget_words=self.budget_words,
            history_window=self.history_window,
        )


def _error(status: int, message: str, stage: str | None = None) -> JSONResponse:
    payload: dict = {"error": message}
    if stage:
        payload["stage"] = stage
    return JSONResponse(status_code=status, content=payload)


def create_app(cfg: ServiceConfig) -> FastAPI:
    for required in (cfg.corpus_path, cfg.index_path):
        if not Path(required).exists():
            raise FileNotFoundError(f"configured file does not exist: {required}")

    state = _AppState(cfg)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        state.load()
        yield

    app = FastAPI(title="specsynth", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.engine = state

    if cfg.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=cfg.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, err: RequestValidationError):
        return _error(400, f"invalid request body: {err.errors()[:1]}")

    @app.post("/api/session")
    async def create_session(request: Request):
        raw = await request.body()
        if raw.strip() not in (b"", b"{}"):
            return _error(400, "request body must be empty or {}")
        if not state.ready:
            return _error(503, "service is starting")
        session = state.assistant.sessions.create()
        return {"session_id": session.session_id, "disclaimer": cfg.disclaimer_text}

    @app.post("/api/query")
    async def post_query(body: dict):
        session_id = str(body.get("session_id", ""))
        query = str(body.get("query", ""))
        if not query.strip():
            return _error(400, "empty query")
        if not state.ready:
            return _error(503, "service is starting")
        try:
            session = state.assistant.sessions.get(session_id)
        except KeyError:
            return _error(404, f"unknown session: {session_id}")
        lock = state.session_lock(session_id)
        with lock:
            try:
                record = state.assistant.answer(session, query)
            except StageError as err:
                return _error(502, str(err.cause), stage=err.stage)
            except ValueError as err:
                return _error(400, str(err))
        return {
            "query": record.query,
            "response_text": record.response_text,
            "citations": record.citations,
            "context_ids": record.context_ids,
            "scores": record.scores,
            "prompt_words": record.prompt_words,
            "model_name": record.model_name,
            "turn_index": len(session.turns) - 1,
        }

    @app.post("/api/feedback")
    async def post_feedback(body: dict):
        session_id = str(body.get("session_id", ""))
        verdict = str(body.get("verdict", ""))
        try:
            turn_index = int(body.get("turn_index", -1))
        except (TypeError, ValueError):
            return _error(400, "turn_index must be an integer")
        if verdict not in fb.VERDICTS:
            return _error(400, f"verdict must be one of {list(fb.VERDICTS)}")
        try:
            session = state.assistant.sessions.get(session_id)
        except KeyError:
            return _error(404, f"unknown session: {session_id}")
        record = fb.FeedbackRecord(
            session_id=session_id,
            turn_index=turn_index,
            verdict=verdict,
            timestamp=time.time(),
        )
        try:
            fb.record_feedback(state.feedback_log, record, session)
        except ValueError as err:
            return _error(404, str(err))
        return Response(status_code=204)

    @app.post("/api/expert-request")
    async def post_expert_request(body: dict):
        session_id = str(body.get("session_id", ""))
        try:
            turn_index = int(body.get("turn_index", -1))
        except (TypeError, ValueError):
            return _error(400, "turn_index must be an integer")
        try:
            session = state.assistant.sessions.get(session_id)
        except KeyError:
            return _error(404, f"unknown session: {session_id}")
        if turn_index < 0 or turn_index >= len(session.turns):
            return _error(404, f"turn {turn_index} does not exist")
        record = state.assistant_record_for(session, turn_index)
        request = fb.create_expert_request(
            record,
            state.assistant.corpus,
            state.queue,
            issues_url=cfg.issues_api_url,
            issues_token=cfg.issues_token,
        )
        return {"request_id": request.request_id}

    @app.get("/api/health")
    async def health():
        if not state.ready:
            return {"status": "starting", "corpus_chunks": 0, "index_size": 0}
        return {
            "status": "ready",
            "corpus_chunks": len(state.assistant.chunks),
            "index_size": len(state.assistant.index),
        }

    return app


class _AppState:
    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.ready = False
        self.assistant: Assistant | None = None
        self.feedback_log = fb.FeedbackLog(cfg.feedback_log_path)
        self.queue = fb.RequestQueue(cfg.request_queue_dir)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def load(self) -> None:
        sessions = SessionStore(self.cfg.session_dir)
        self.assistant = Assistant.from_files(
            self.cfg.corpus_path,
            self.cfg.index_path,
            self.cfg.pipeline_config(),
            sessions,
        )
        self.ready = True

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def assistant_record_for(self, session, turn_index: int):
        """Rebuild an AnswerRecord view of a stored turn."""
        from .pipeline import AnswerRecord

        turn = session.turns[turn_index]
        citations = [
            self.assistant.corpus[cid].source
            for cid in turn.context_ids
            if cid in self.assistant.corpus
        ]
        return AnswerRecord(
            query=turn.query,
            response_text=turn.response,
            citations=citations,
            context_ids=list(turn.context_ids),
            scores=[],
            prompt_words=0,
            model_name=self.cfg.model_name,
        )


def serve(cfg: ServiceConfig) -> None:
    import uvicorn

    app = create_app(cfg)
    uvicorn.run(app, host=cfg.bind_address, port=cfg.port, log_level="info")
