"""Shared text primitives used by the embedder and the lexical metrics.

Both sides must tokenize identically, otherwise corpus vectors and query
vectors (or candidate and reference token streams) stop being comparable.
"""

import re

# Runs of unicode alphanumerics; underscore is punctuation here.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def collapse_whitespace(text: str) -> str:
    """Collapse whitespace runs to a single space and trim the ends."""
    return _WS_RE.sub(" ", text).strip()


def word_count(text: str) -> int:
    """Number of whitespace-delimited tokens."""
    return len(text.split())
