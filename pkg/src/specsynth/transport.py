"""HTTP plumbing shared by the embedding, completion, and issue clients."""

from __future__ import annotations

import time
from typing import Callable

import requests

RETRYABLE_STATUSES = (429, 500, 502, 503, 504)


class TransportError(RuntimeError):
    """Remote endpoint unreachable or persistently failing."""


class ProtocolError(RuntimeError):
    """Remote endpoint answered with something other than the expected JSON."""


def post_json(
    url: str,
    payload: dict,
    headers: dict | None = None,
    timeout: float = 60.0,
    max_retries: int = 3,
    base_delay: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
) -> dict:
    """POST a JSON payload, retrying retryable failures with backoff.

    Retries on connection errors, timeouts, and 429/5xx responses, waiting
    base_delay * 2**attempt between tries; total attempts = max_retries + 1.
    """
    last_error: str = ""
    for attempt in range(max_retries + 1):
        if attempt > 0:
            sleep(base_delay * 2 ** (attempt - 1))
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as err:
            last_error = str(err)
            continue
        if response.status_code in RETRYABLE_STATUSES:
            last_error = f"HTTP {response.status_code}"
            continue
        if response.status_code >= 400:
            raise TransportError(f"POST {url} failed: HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as err:
            raise ProtocolError(f"POST {url} returned non-JSON response: {err}") from err
    raise TransportError(
        f"POST {url} failed after {max_retries + 1} attempts: {last_error}"
    )
