"""Like/dislike logging and the expert-assistance request loop.

Requests are queued locally first and optionally mirrored to a remote
issue tracker; the local queue is the source of truth until the remote
acks. Resolutions flow back into the corpus as expert-attributed chunks.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path

from . import transport
from .ingest import Chunk
from .pipeline import AnswerRecord, Assistant, Session

VERDICTS = ("like", "dislike")


class AuthorizationError(PermissionError):
    """Caller is not in the registered expert list."""


@dataclass(frozen=True)
class FeedbackRecord:
    session_id: str
    turn_index: int
    verdict: str
    timestamp: float

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")


@dataclass
class ExpertRequest:
    request_id: str
    query: str
    context: list[dict]  # items of {"text", "source"}
    response: str
    status: str = "open"  # or "resolved"
    resolver_expert_id: str | None = None
    resolution_text: str | None = None
    pending_sync: bool = False


class FeedbackLog:
    """Append-only verdict log; the latest verdict per turn wins."""

    def __init__(self, path: Path | str):
        self.path = Path(path)

    def record(self, record: FeedbackRecord, session: Session) -> None:
        if record.turn_index < 0 or record.turn_index >= len(session.turns):
            raise ValueError(
                f"turn {record.turn_index} does not exist in session {session.session_id}"
            )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(record)) + "\n")

    def entries(self) -> list[FeedbackRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(FeedbackRecord(**json.loads(line)))
        return out

    def verdicts(self) -> dict[tuple[str, int], str]:
        latest: dict[tuple[str, int], str] = {}
        for record in self.entries():
            latest[(record.session_id, record.turn_index)] = record.verdict
        return latest


def record_feedback(log: FeedbackLog, record: FeedbackRecord, session: Session) -> None:
    log.record(record, session)


class RequestQueue:
    """Directory of requests/{id}.json files."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def save(self, request: ExpertRequest) -> None:
        path = self.directory / f"{request.request_id}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(request), fh, ensure_ascii=False, indent=2)

    def load(self, request_id: str) -> ExpertRequest:
        path = self.directory / f"{request_id}.json"
        if not path.exists():
            raise KeyError(f"unknown request: {request_id}")
        with open(path, encoding="utf-8") as fh:
            return ExpertRequest(**json.load(fh))

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


class ExpertRegistry:
    """Flat file of expert ids, one per line; '#' starts a comment."""

    def __init__(self, expert_ids: set[str]):
        self.expert_ids = set(expert_ids)

    @classmethod
    def from_file(cls, path: Path | str) -> "ExpertRegistry":
        ids = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                entry = line.split("#", 1)[0].strip()
                if entry:
                    ids.add(entry)
        return cls(ids)

    def __contains__(self, expert_id: str) -> bool:
        return expert_id in self.expert_ids


def render_issue_body(record: AnswerRecord, contexts: list[dict]) -> str:
    parts = ["## Query", record.query, "", "## Context"]
    for item in contexts:
        parts.append(item["text"])
        parts.append("")
    parts.extend(["## Response", record.response_text])
    return "\n".join(parts)


def create_expert_request(
    record: AnswerRecord,
    corpus: dict[str, Chunk],
    queue: RequestQueue,
    issues_url: str | None = None,
    issues_token: str | None = None,
) -> ExpertRequest:
    """Persist an assistance request locally and mirror it as an issue.

    If the remote tracker is unreachable the request is still saved with a
    pending-sync flag; its id is then a local UUID instead of the issue
    number.
    """
    contexts = [
        {"text": corpus[cid].text, "source": corpus[cid].source}
        for cid in record.context_ids
    ]
    body = render_issue_body(record, contexts)
    title = f"Expert assistance: {record.query[:80]}"

    issues_url = issues_url or os.environ.get("ISSUES_API_URL")
    issues_token = issues_token or os.environ.get("ISSUES_TOKEN")
    request_id: str | None = None
    pending_sync = False
    if issues_url:
        headers = {"Content-Type": "application/json"}
        if issues_token:
            headers["Authorization"] = f"Bearer {issues_token}"
        try:
            # Local persistence is authoritative; don't stall long on a
            # flaky tracker.
            reply = transport.post_json(
                issues_url,
                {"title": title, "body": body},
                headers=headers,
                max_retries=1,
                base_delay=0.2,
            )
            request_id = str(reply["number"])
        except (transport.TransportError, transport.ProtocolError, KeyError, TypeError):
            pending_sync = True
    request = ExpertRequest(
        request_id=request_id or uuid.uuid4().hex,
        query=record.query,
        context=contexts,
        response=record.response_text,
        status="open",
        pending_sync=pending_sync,
    )
    queue.save(request)
    return request


def resolve_expert_request(
    request_id: str,
    expert_id: str,
    resolution_text: str,
    queue: RequestQueue,
    registry: ExpertRegistry,
    assistant: Assistant,
) -> list[Chunk]:
    """Fold an expert resolution back into the corpus and index."""
    request = queue.load(request_id)
    if request.status == "resolved":
        raise ValueError(f"request {request_id} already resolved")
    if expert_id not in registry:
        raise AuthorizationError(f"expert {expert_id!r} is not registered")

    chunks = assistant.add_expert_text(resolution_text, expert_id)
    request.status = "resolved"
    request.resolver_expert_id = expert_id
    request.resolution_text = resolution_text
    queue.save(request)
    return chunks
