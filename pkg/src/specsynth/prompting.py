"""Prompt assembly: system text, few-shot examples, context, history, query.

The assembled prompt is a plain chat message list. When the word estimate
exceeds the budget, content is dropped in a fixed order (least-similar
contexts, then oldest history turns, then few-shot examples last-first)
until it fits; the system text and the live query are never dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .ingest import Chunk
from .textproc import word_count

DEFAULT_SYSTEM_TEXT = (
    "You are a helpful assistant. Use what you know already to answer the "
    "QUESTION. Improve the answer using the following pieces of CONTEXT. "
    "Always return the most relevant SOURCE."
)

# The two alternative variants approximate the public prompts of the
# systems they are named after; only the default text is exact.
BUILTIN_TEMPLATES: dict[str, "PromptTemplate"] = {}


@dataclass(frozen=True)
class PromptTemplate:
    system_text: str
    context_header: str = "CONTEXT:"
    question_header: str = "QUESTION:"
    variant_name: str = "default"

    def __post_init__(self) -> None:
        if not self.system_text:
            raise ValueError("system_text must be non-empty")


BUILTIN_TEMPLATES["default"] = PromptTemplate(system_text=DEFAULT_SYSTEM_TEXT)
BUILTIN_TEMPLATES["chatgpt_enterprise"] = PromptTemplate(
    system_text=(
        "You are an intelligent assistant helping users with questions about "
        "technical documents. Answer ONLY with the facts listed in the pieces "
        "of CONTEXT below. If there is not enough information, say you do not "
        "know. Each context piece names its SOURCE; always include the source "
        "you used."
    ),
    variant_name="chatgpt_enterprise",
)
BUILTIN_TEMPLATES["privategpt"] = PromptTemplate(
    system_text=(
        "Use the following pieces of CONTEXT to answer the QUESTION at the "
        "end. If you don't know the answer, just say that you don't know, "
        "don't try to make up an answer."
    ),
    variant_name="privategpt",
)


@dataclass(frozen=True)
class FewShotExample:
    query: str
    context: tuple[str, ...]
    ideal_response: str

    def __post_init__(self) -> None:
        if not self.query or not self.ideal_response or not all(self.context):
            raise ValueError("few-shot fields must be non-empty")


@dataclass(frozen=True)
class AssembledPrompt:
    messages: tuple[dict, ...]
    estimated_words: int
    # Context texts that survived budgeting, in similarity order; carried
    # for the echo mock and for citation bookkeeping.
    context_texts: tuple[str, ...] = ()


def _user_content(
    template: PromptTemplate, context_texts: list[str], query: str
) -> str:
    parts = []
    if context_texts:
        parts.append(template.context_header)
        parts.extend(context_texts)
    parts.append(template.question_header)
    parts.append(query)
    return "\n".join(parts)


def assemble(
    query: str,
    contexts: list[Chunk],
    history: list[tuple[str, str]],
    template: PromptTemplate,
    shots: list[FewShotExample] = (),
    budget_words: int = 3000,
    history_window: int = 3,
) -> AssembledPrompt:
    """Build the chat message list, dropping content to fit the budget.

    ``contexts`` must be ordered by descending similarity; ``history`` is
    (query, response) pairs, oldest first, of which only the last
    ``history_window`` turns are considered.
    """
    query = query.strip()
    if not query:
        raise ValueError("query must be non-empty")

    minimal = (
        word_count(template.system_text)
        + word_count(template.question_header)
        + word_count(query)
    )
    if budget_words < minimal:
        raise ValueError("budget too small")

    contexts_kept = list(contexts)
    history_kept = list(history[-history_window:]) if history_window > 0 else []
    shots_kept = list(shots)

    while True:
        messages: list[dict] = [{"role": "system", "content": template.system_text}]
        for shot in shots_kept:
            messages.append(
                {
                    "role": "user",
                    "content": _user_content(template, list(shot.context), shot.query),
                }
            )
            messages.append({"role": "assistant", "content": shot.ideal_response})
        for past_query, past_response in history_kept:
            messages.append({"role": "user", "content": past_query})
            messages.append({"role": "assistant", "content": past_response})
        context_texts = [c.text for c in contexts_kept]
        messages.append(
            {"role": "user", "content": _user_content(template, context_texts, query)}
        )

        estimated = sum(word_count(m["content"]) for m in messages)
        if estimated <= budget_words:
            return AssembledPrompt(
                messages=tuple(messages),
                estimated_words=estimated,
                context_texts=tuple(context_texts),
            )
        if contexts_kept:
            contexts_kept.pop()  # least similar first
        elif history_kept:
            history_kept.pop(0)  # oldest turn first
        elif shots_kept:
            shots_kept.pop()  # last example first
        else:
            # Nothing left to drop; headers alone exceed the budget.
            raise ValueError("budget too small")


def load_prompt_config(
    path: Path | str,
) -> tuple[dict[str, PromptTemplate], list[FewShotExample]]:
    """Read templates and few-shot examples from a JSON config file."""
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    templates = dict(BUILTIN_TEMPLATES)
    for raw in config.get("templates", []):
        template = PromptTemplate(
            system_text=raw["system_text"],
            context_header=raw.get("context_header", "CONTEXT:"),
            question_header=raw.get("question_header", "QUESTION:"),
            variant_name=raw["variant_name"],
        )
        templates[template.variant_name] = template
    shots = [
        FewShotExample(
            query=raw["query"],
            context=tuple(raw["context"]),
            ideal_response=raw["ideal_response"],
        )
        for raw in config.get("shots", [])
    ]
    return templates, shots
