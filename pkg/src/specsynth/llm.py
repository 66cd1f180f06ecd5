"""Chat-completion backends: one remote protocol, two offline mocks.

mock_echo_context parrots the retrieved context back, which turns the
whole pipeline into something measurable without a model: if retrieval
found the right chunk, the "response" contains its text and scores
near-perfect overlap against a reference built from that same chunk.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

from . import transport
from .ingest import SOURCE_PREFIX
from .prompting import AssembledPrompt

TransportError = transport.TransportError
ProtocolError = transport.ProtocolError


@dataclass(frozen=True)
class LlmConfig:
    backend: str = "remote_http"  # or "mock_echo_context" / "mock_canned"
    endpoint_url: str | None = None
    model_name: str = "gpt-4"
    temperature: float = 0.0
    max_output_tokens: int = 1000
    timeout_seconds: int = 60
    max_retries: int = 3
    canned_text: str = ""
    retry_base_seconds: float = 1.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")
        if self.backend not in ("remote_http", "mock_echo_context", "mock_canned"):
            raise ValueError(f"unknown llm backend: {self.backend!r}")


@dataclass(frozen=True)
class Completion:
    text: str
    finish_reason: str  # "stop" | "length" | "error"
    latency_ms: int
    prompt_words: int


def complete(prompt: AssembledPrompt, cfg: LlmConfig) -> Completion:
    started = time.monotonic()
    if cfg.backend == "mock_canned":
        text, reason = cfg.canned_text, "stop"
    elif cfg.backend == "mock_echo_context":
        text, reason = _echo_context(prompt), "stop"
    else:
        text, reason = _complete_remote(prompt, cfg)
    return Completion(
        text=text,
        finish_reason=reason,
        latency_ms=int((time.monotonic() - started) * 1000),
        prompt_words=prompt.estimated_words,
    )


def _echo_context(prompt: AssembledPrompt) -> str:
    bodies = []
    first_source: str | None = None
    for text in prompt.context_texts:
        cut = text.rfind(SOURCE_PREFIX)
        if cut >= 0:
            bodies.append(text[:cut])
            if first_source is None:
                first_source = text[cut + 1 :]
        else:
            bodies.append(text)
    echoed = "\n\n".join(bodies)
    if first_source:
        echoed += "\n" + first_source
    return echoed


def _complete_remote(prompt: AssembledPrompt, cfg: LlmConfig) -> tuple[str, str]:
    base_url = cfg.endpoint_url or os.environ.get("LLM_BASE_URL")
    if not base_url:
        raise ValueError("remote_http backend requires endpoint_url or LLM_BASE_URL")
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get("LLM_API_KEY")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    reply = transport.post_json(
        base_url.rstrip("/") + "/chat/completions",
        {
            "model": cfg.model_name,
            "messages": list(prompt.messages),
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_output_tokens,
        },
        headers=headers,
        timeout=cfg.timeout_seconds,
        max_retries=cfg.max_retries,
        base_delay=cfg.retry_base_seconds,
    )
    try:
        choice = reply["choices"][0]
        text = choice["message"]["content"]
    except (KeyError, IndexError, TypeError) as err:
        raise ProtocolError(f"malformed chat completion response: {reply!r}") from err
    return text, choice.get("finish_reason", "stop")
