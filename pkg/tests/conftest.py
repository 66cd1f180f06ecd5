"""Shared fixtures: synthetic documents, corpora, and a scripted stub server."""

from __future__ import annotations

import io
import json
import threading
import zipfile
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from specsynth.embedder import EmbedderConfig, embed_batch
from specsynth.ingest import RawDocument, RawSection, SegmenterConfig, preprocess, segment
from specsynth.vector_index import IndexEntry, VectorIndex

_DOCX_DOCUMENT_XML = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<w:document xmlns:w="http://schemas.openxmlformats.org/wordprocessingml/2006/main">
  <w:body>
    <w:p><w:pPr><w:pStyle w:val="Heading1"/></w:pPr><w:r><w:t>Introduction</w:t></w:r></w:p>
    <w:p><w:r><w:t>The system shall support registration.</w:t></w:r></w:p>
    <w:p><w:r><w:t>Deregistration follows </w:t></w:r><w:r><w:t>the same flow.</w:t></w:r></w:p>
    <w:p><w:pPr><w:pStyle w:val="Heading1"/></w:pPr><w:r><w:t>Scope</w:t></w:r></w:p>
    <w:p><w:r><w:t>This document covers the access network.</w:t></w:r></w:p>
  </w:body>
</w:document>
"""

_DOCX_CONTENT_TYPES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
  <Default Extension="xml" ContentType="application/xml"/>
  <Override PartName="/word/document.xml"
    ContentType="application/vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml"/>
</Types>
"""


def make_docx(document_xml: str = _DOCX_DOCUMENT_XML) -> bytes:
    """Hand-built minimal docx: a zip with the main document XML."""
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr("[Content_Types].xml", _DOCX_CONTENT_TYPES)
        archive.writestr("word/document.xml", document_xml)
    return buffer.getvalue()


@pytest.fixture
def minimal_docx() -> bytes:
    return make_docx()


def make_fixture_corpus(seed: int = 7, documents: int = 5, n_words: int = 60):
    """Small corpus of distinct-vocabulary documents plus its chunks."""
    import random

    rng = random.Random(seed)
    docs = []
    for d in range(documents):
        paragraphs = []
        for p in range(rng.randint(1, 3)):
            words = [f"term{d}x{p}w{i}" for i in range(rng.randint(5, 25))]
            paragraphs.append(" ".join(words) + ".")
        docs.append(
            RawDocument(
                spec_id=f"TS 00.{d:03d}",
                title=f"Fixture spec {d}",
                sections=(RawSection(f"Section {d}.1", tuple(paragraphs)),),
            )
        )
    chunks = []
    cfg = SegmenterConfig(n_words=n_words)
    for doc in docs:
        chunks.extend(segment(preprocess(doc), cfg))
    return docs, chunks


@pytest.fixture
def fixture_corpus():
    return make_fixture_corpus()


def build_index(chunks, embed_cfg: EmbedderConfig | None = None) -> VectorIndex:
    cfg = embed_cfg or EmbedderConfig()
    vectors = embed_batch([c.text for c in chunks], cfg)
    return VectorIndex.build(
        [IndexEntry(chunk_id=c.chunk_id, vector=v) for c, v in zip(chunks, vectors)],
        cfg.dim,
    )


# Echo-world vectors use a roomy dimension: at 384 a 300-token chunk fills
# most buckets and signed collisions drown the small decoy-to-content
# signal the ablation fixture depends on.
ECHO_DIM = 4096


def make_echo_world(n_docs: int = 10, content_words: int = 340, seed: int = 2024):
    """Corpus + benchmark built so the echo mock is measurable.

    Each document has one large content section (unique vocabulary) and two
    small excerpt sections quoting a slice of it. A content-text query
    retrieves the content chunk first with its excerpts behind it, so the
    echoed response is dominated by reference text. Decoy items instead
    query an excerpt verbatim: the excerpt chunk wins rank 1 and the
    correct content chunk lands at rank 2-3, which is what makes k > 1
    matter.
    """
    import random
    import string

    from specsynth.harness import BenchmarkItem

    rng = random.Random(seed)
    seen: set[str] = set()

    def fresh_word() -> str:
        while True:
            word = "".join(rng.choices(string.ascii_lowercase, k=rng.randint(4, 9)))
            if word not in seen:
                seen.add(word)
                return word

    documents = []
    for d in range(n_docs):
        vocab = [fresh_word() for _ in range(content_words)]
        sentences = []
        cursor = 0
        while cursor < len(vocab):
            length = min(rng.randint(12, 25), len(vocab) - cursor)
            sentences.append(" ".join(vocab[cursor : cursor + length]) + ".")
            cursor += length
        content = " ".join(sentences)
        # decoy excerpt is larger so its content link survives hash noise;
        # the second excerpt stays small to keep echoed responses clean
        excerpt_a = " ".join(vocab[0:14])
        excerpt_b = " ".join(vocab[150:156])
        documents.append(
            RawDocument(
                spec_id=f"SPEC{d}",
                title=f"Synthetic spec {d}",
                sections=(
                    RawSection(f"sect{d}main", (content,)),
                    RawSection(f"sect{d}extra0", (excerpt_a,)),
                    RawSection(f"sect{d}extra1", (excerpt_b,)),
                ),
            )
        )

    chunks = []
    for doc in documents:
        chunks.extend(segment(preprocess(doc), SegmenterConfig(n_words=360)))

    content_chunks = {
        c.spec_id: c for c in chunks if c.section_title.endswith("main")
    }
    excerpt_chunks = {
        (c.spec_id, c.section_title[-1]): c
        for c in chunks
        if "extra" in c.section_title
    }

    content_items = []
    decoy_items = []
    for d in range(n_docs):
        content = content_chunks[f"SPEC{d}"]
        content_items.append(
            BenchmarkItem(
                item_id=f"content-{d}",
                query=content.text,
                reference_response=content.body().strip(),
                source_spec=content.spec_id,
            )
        )
        decoy = excerpt_chunks[(f"SPEC{d}", "0")]
        decoy_items.append(
            BenchmarkItem(
                item_id=f"decoy-{d}",
                query=decoy.text,
                reference_response=content.body().strip(),
                source_spec=content.spec_id,
            )
        )
    return documents, chunks, content_items, decoy_items


class StubServer:
    """Scripted HTTP stub: pops queued (status, body) replies in order.

    Records every request (path, parsed JSON body) for assertions. When the
    script runs dry it replies 200 with the last queued body.
    """

    def __init__(self):
        self.script: list[tuple[int, dict]] = []
        self.requests: list[tuple[str, dict]] = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw) if raw else {}
                except ValueError:
                    body = {"_raw": raw.decode("utf-8", "replace")}
                stub.requests.append((self.path, body))
                status, reply = (
                    stub.script.pop(0) if stub.script else (200, {"ok": True})
                )
                payload = json.dumps(reply).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._server = HTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()
