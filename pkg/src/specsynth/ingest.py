"""Document ingestion: extraction, cleanup, and segmentation into chunks.

A chunk is the retrieval unit: a span of section text small enough to fit a
completion prompt, carrying a citation suffix that names the specification
and section it came from. Segmentation never breaks a paragraph except at
sentence boundaries, and never breaks a sentence at all, so a chunk always
reads as coherent prose.

Chunk bodies partition the section text exactly: boundary separators stay
attached to the front of the following chunk, so concatenating the bodies
of a section reproduces its preprocessed text byte for byte.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import zipfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable
from xml.etree import ElementTree

from .textproc import word_count

SOURCE_PREFIX = "\nSource: "

_SENTENCE_SPLIT_RE = re.compile(r"((?<=[.?!;])\s+)")
_EOL_RE = re.compile(r"\r\n?")
_SPACE_RUN_RE = re.compile(r"[ \t]+")

_DOCX_NS = "{http://schemas.openxmlformats.org/wordprocessingml/2006/main}"

# Codepoints stripped during cleanup: zero-width characters, BOM, soft
# hyphen, private-use area, and C0/C1 controls other than tab/newline.
_STRIP_CHARS_RE = re.compile(
    "["
    "\u200b-\u200d\ufeff\u00ad\ue000-\uf8ff"
    "\u0000-\u0008\u000b\u000c\u000e-\u001f\u007f-\u009f"
    "]"
)


class ParseError(ValueError):
    """A document could not be extracted."""


@dataclass(frozen=True)
class RawSection:
    section_title: str
    paragraphs: tuple[str, ...]


@dataclass(frozen=True)
class RawDocument:
    spec_id: str
    title: str
    sections: tuple[RawSection, ...]


@dataclass(frozen=True)
class Chunk:
    """A segmented, source-attributed text sample."""

    chunk_id: str
    text: str
    spec_id: str
    section_title: str
    source: str
    word_count: int
    origin: str  # "document" or "expert"

    def body(self) -> str:
        """Chunk text with the citation suffix stripped."""
        cut = self.text.rfind(SOURCE_PREFIX)
        return self.text[:cut] if cut >= 0 else self.text


@dataclass(frozen=True)
class SegmenterConfig:
    n_words: int = 360
    strategy: str = "section_aware"  # or "fixed_overlap"
    fixed_chunk_words: int = 1000
    fixed_overlap_words: int = 100

    def __post_init__(self) -> None:
        if self.n_words < 1:
            raise ValueError("n_words must be >= 1")
        if self.strategy not in ("section_aware", "fixed_overlap"):
            raise ValueError(f"unknown segmentation strategy: {self.strategy!r}")
        if self.fixed_overlap_words >= self.fixed_chunk_words:
            raise ValueError("fixed_overlap_words must be < fixed_chunk_words")


@dataclass(frozen=True)
class CleanupRules:
    """Line filters and character cleanup applied by :func:`preprocess`.

    Caption lines match one of ``caption_patterns`` and do not end like a
    sentence. Code-line removal is off unless ``code_patterns`` is set.
    """

    caption_patterns: tuple[str, ...] = (r"(Figure|Table)\s*\d+",)
    code_patterns: tuple[str, ...] = ()


DEFAULT_CLEANUP = CleanupRules()


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def extract_document(
    file_bytes: bytes,
    format: str,
    spec_id: str = "",
    title: str = "",
) -> RawDocument:
    """Parse raw file bytes into a section-structured document.

    ``structured_text`` treats lines beginning with "## " as section
    headings and blank lines as paragraph delimiters. ``docx`` reads the
    main document XML from the archive and splits at heading-styled
    paragraphs. A document with text but no detectable headings becomes a
    single section titled "(untitled)".
    """
    if format == "structured_text":
        return _extract_structured_text(file_bytes, spec_id, title)
    if format == "docx":
        return _extract_docx(file_bytes, spec_id, title)
    raise ValueError(f"unknown document format: {format!r}")


def _extract_structured_text(data: bytes, spec_id: str, title: str) -> RawDocument:
    name = spec_id or "<document>"
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ParseError(f"{name}: not valid UTF-8 at byte {err.start}") from err
    if not text.strip():
        raise ParseError(f"{name}: empty document")

    sections: list[RawSection] = []
    current_title: str | None = None
    paragraphs: list[str] = []
    lines: list[str] = []

    def flush_paragraph() -> None:
        if lines:
            paragraphs.append("\n".join(lines))
            lines.clear()

    def flush_section() -> None:
        flush_paragraph()
        if current_title is not None or paragraphs:
            sections.append(
                RawSection(
                    section_title=current_title if current_title is not None else "(untitled)",
                    paragraphs=tuple(paragraphs),
                )
            )
        paragraphs.clear()

    for line in _EOL_RE.sub("\n", text).split("\n"):
        if line.startswith("## "):
            flush_section()
            current_title = line[3:].strip()
        elif not line.strip():
            flush_paragraph()
        else:
            lines.append(line)
    flush_section()

    return RawDocument(spec_id=spec_id, title=title or spec_id, sections=tuple(sections))


def _extract_docx(data: bytes, spec_id: str, title: str) -> RawDocument:
    name = spec_id or "<document>"
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as err:
        raise ParseError(f"{name}: malformed docx archive: {err}") from err
    try:
        xml_bytes = archive.read("word/document.xml")
    except KeyError as err:
        raise ParseError(f"{name}: archive has no word/document.xml") from err
    try:
        root = ElementTree.fromstring(xml_bytes)
    except ElementTree.ParseError as err:
        line, col = err.position
        raise ParseError(
            f"{name}: malformed document XML at line {line}, column {col}"
        ) from err

    sections: list[RawSection] = []
    current_title: str | None = None
    paragraphs: list[str] = []

    def flush_section() -> None:
        if current_title is not None or paragraphs:
            sections.append(
                RawSection(
                    section_title=current_title if current_title is not None else "(untitled)",
                    paragraphs=tuple(paragraphs),
                )
            )
        paragraphs.clear()

    for para in root.iter(_DOCX_NS + "p"):
        text = _docx_paragraph_text(para)
        if _docx_is_heading(para):
            flush_section()
            current_title = text.strip()
        elif text.strip():
            paragraphs.append(text)
    flush_section()

    if not sections:
        raise ParseError(f"{name}: empty document")
    return RawDocument(spec_id=spec_id, title=title or spec_id, sections=tuple(sections))


def _docx_paragraph_text(para: ElementTree.Element) -> str:
    parts: list[str] = []
    for node in para.iter():
        if node.tag == _DOCX_NS + "t":
            parts.append(node.text or "")
        elif node.tag == _DOCX_NS + "tab":
            parts.append("\t")
        elif node.tag == _DOCX_NS + "br":
            parts.append("\n")
    return "".join(parts)


def _docx_is_heading(para: ElementTree.Element) -> bool:
    ppr = para.find(_DOCX_NS + "pPr")
    if ppr is None:
        return False
    style = ppr.find(_DOCX_NS + "pStyle")
    if style is None:
        return False
    val = style.get(_DOCX_NS + "val") or ""
    return val.lower().startswith("heading") or val.lower() == "title"


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def preprocess(doc: RawDocument, rules: CleanupRules = DEFAULT_CLEANUP) -> RawDocument:
    """Normalize whitespace, strip unwanted codepoints, drop caption lines.

    Total function: never raises. Paragraphs emptied by cleanup are
    dropped, as are sections left with no paragraphs.
    """
    caption_res = [re.compile(p) for p in rules.caption_patterns]
    code_res = [re.compile(p) for p in rules.code_patterns]

    sections: list[RawSection] = []
    for section in doc.sections:
        kept: list[str] = []
        for para in section.paragraphs:
            cleaned = _clean_paragraph(para, caption_res, code_res)
            if cleaned:
                kept.append(cleaned)
        if kept:
            sections.append(RawSection(section.section_title, tuple(kept)))
    return replace(doc, sections=tuple(sections))


def _clean_paragraph(
    para: str,
    caption_res: list[re.Pattern],
    code_res: list[re.Pattern],
) -> str:
    lines = []
    for line in _EOL_RE.sub("\n", para).split("\n"):
        if _is_caption(line, caption_res):
            continue
        if any(p.search(line) for p in code_res):
            continue
        lines.append(line)
    text = _STRIP_CHARS_RE.sub("", " ".join(lines))
    return _SPACE_RUN_RE.sub(" ", text).strip()


def _is_caption(line: str, caption_res: list[re.Pattern]) -> bool:
    stripped = line.strip()
    if not any(p.match(stripped) for p in caption_res):
        return False
    # A caption heading lacks sentence-final punctuation; prose survives.
    return not stripped.endswith((".", "!", "?"))


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

def render_source(spec_id: str, section_title: str) -> str:
    return f"{spec_id} {section_title}"


def segment(doc: RawDocument, cfg: SegmenterConfig) -> list[Chunk]:
    """Split a preprocessed document into source-attributed chunks.

    section_aware: chunks never cross section boundaries. Within a section,
    whole paragraphs are packed greedily up to ``n_words``; a paragraph
    longer than the budget contributes whole sentences instead, and a
    single sentence over budget becomes its own oversized chunk.

    fixed_overlap: sliding word windows over the concatenated document
    text, attributed to the section containing each window's start.
    """
    if cfg.strategy == "fixed_overlap":
        return _segment_fixed_overlap(doc, cfg)

    chunks: list[Chunk] = []
    ordinal = 0
    for section in doc.sections:
        if not section.paragraphs:
            continue
        source = render_source(doc.spec_id, section.section_title)
        pieces = _section_pieces(section.paragraphs, cfg.n_words)
        for group in _pack_pieces(pieces, cfg.n_words):
            body = "".join(lead + text for lead, text, _ in group)
            chunks.append(
                _make_chunk(
                    body=body,
                    spec_id=doc.spec_id,
                    section_title=section.section_title,
                    source=source,
                    ordinal=ordinal,
                    origin="document",
                )
            )
            ordinal += 1
    return chunks


def _section_pieces(
    paragraphs: Iterable[str], n_words: int
) -> list[tuple[str, str, int]]:
    """Flatten a section into (leading separator, text, word count) pieces.

    Paragraphs within budget stay whole; oversized paragraphs dissolve
    into sentence pieces. The leading separator is the exact text between
    this piece and the previous one, so pieces partition the section.
    """
    pieces: list[tuple[str, str, int]] = []
    for i, para in enumerate(paragraphs):
        lead = "" if i == 0 else "\n\n"
        wc = word_count(para)
        if wc <= n_words:
            pieces.append((lead, para, wc))
            continue
        for j, (sent_lead, sent) in enumerate(_split_sentences(para)):
            pieces.append((lead if j == 0 else sent_lead, sent, word_count(sent)))
    return pieces


def _split_sentences(text: str) -> list[tuple[str, str]]:
    """Split at sentence-final punctuation, keeping exact separators."""
    parts = _SENTENCE_SPLIT_RE.split(text)
    sentences: list[tuple[str, str]] = []
    lead = ""
    for i in range(0, len(parts), 2):
        if parts[i]:
            sentences.append((lead, parts[i]))
            lead = ""
        if i + 1 < len(parts):
            lead += parts[i + 1]
    return sentences


def _pack_pieces(
    pieces: list[tuple[str, str, int]], n_words: int
) -> list[list[tuple[str, str, int]]]:
    groups: list[list[tuple[str, str, int]]] = []
    current: list[tuple[str, str, int]] = []
    current_wc = 0
    for piece in pieces:
        wc = piece[2]
        if current and current_wc + wc > n_words:
            groups.append(current)
            current, current_wc = [], 0
        current.append(piece)
        current_wc += wc
    if current:
        groups.append(current)
    return groups


def _segment_fixed_overlap(doc: RawDocument, cfg: SegmenterConfig) -> list[Chunk]:
    words: list[str] = []
    section_of_word: list[str] = []
    for section in doc.sections:
        for para in section.paragraphs:
            for w in para.split():
                words.append(w)
                section_of_word.append(section.section_title)
    if not words:
        return []

    chunks: list[Chunk] = []
    size, overlap = cfg.fixed_chunk_words, cfg.fixed_overlap_words
    start = 0
    ordinal = 0
    while start < len(words):
        end = min(start + size, len(words))
        section_title = section_of_word[start]
        chunks.append(
            _make_chunk(
                body=" ".join(words[start:end]),
                spec_id=doc.spec_id,
                section_title=section_title,
                source=render_source(doc.spec_id, section_title),
                ordinal=ordinal,
                origin="document",
            )
        )
        ordinal += 1
        if end == len(words):
            break
        start = end - overlap
    return chunks


def _make_chunk(
    body: str,
    spec_id: str,
    section_title: str,
    source: str,
    ordinal: int,
    origin: str,
) -> Chunk:
    digest = hashlib.sha256(
        f"{source}\x1f{ordinal}\x1f{body}".encode("utf-8")
    ).hexdigest()[:16]
    return Chunk(
        chunk_id=digest,
        text=body + SOURCE_PREFIX + source,
        spec_id=spec_id,
        section_title=section_title,
        source=source,
        word_count=word_count(body),
        origin=origin,
    )


def segment_expert_text(
    text: str,
    expert_id: str,
    cfg: SegmenterConfig,
    ordinal_base: int = 0,
) -> list[Chunk]:
    """Segment an expert contribution, attributed to the expert as source.

    ``ordinal_base`` keys the content-addressed chunk ids; callers pass the
    current corpus size so repeated identical contributions stay distinct.
    """
    if not text.strip():
        raise ValueError("expert contribution is empty")
    doc = preprocess(
        RawDocument(
            spec_id="",
            title="",
            sections=(RawSection("", tuple(p for p in re.split(r"\n\s*\n", text))),),
        )
    )
    source = f"Expert: {expert_id}"
    chunks: list[Chunk] = []
    for section in doc.sections:
        pieces = _section_pieces(section.paragraphs, cfg.n_words)
        for group in _pack_pieces(pieces, cfg.n_words):
            body = "".join(lead + piece for lead, piece, _ in group)
            chunks.append(
                _make_chunk(
                    body=body,
                    spec_id="",
                    section_title="",
                    source=source,
                    ordinal=ordinal_base + len(chunks),
                    origin="expert",
                )
            )
    if not chunks:
        raise ValueError("expert contribution is empty")
    return chunks


def add_expert_chunk(
    text: str,
    expert_id: str,
    registered_experts: Iterable[str],
    cfg: SegmenterConfig | None = None,
    corpus_path: Path | str | None = None,
    ordinal_base: int = 0,
) -> Chunk:
    """Add an expert contribution to the corpus and return the first chunk.

    Oversized contributions are segmented under the usual word budget; all
    resulting chunks are persisted when ``corpus_path`` is given.
    """
    if expert_id not in set(registered_experts):
        raise PermissionError(f"expert {expert_id!r} is not registered")
    chunks = segment_expert_text(text, expert_id, cfg or SegmenterConfig(), ordinal_base)
    if corpus_path is not None:
        append_corpus(chunks, corpus_path)
    return chunks[0]


# ---------------------------------------------------------------------------
# Corpus store (JSON lines, one chunk per line)
# ---------------------------------------------------------------------------

_CHUNK_FIELDS = ("chunk_id", "text", "spec_id", "section_title", "source", "word_count", "origin")


def _chunk_to_json(chunk: Chunk) -> str:
    record = {name: getattr(chunk, name) for name in _CHUNK_FIELDS}
    return json.dumps(record, ensure_ascii=False)


def write_corpus(chunks: Iterable[Chunk], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(_chunk_to_json(chunk) + "\n")


def append_corpus(chunks: Iterable[Chunk], path: Path | str) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(_chunk_to_json(chunk) + "\n")


def read_corpus(path: Path | str) -> list[Chunk]:
    chunks: list[Chunk] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ParseError(f"{path}: bad corpus record on line {lineno}: {err}") from err
            missing = [name for name in _CHUNK_FIELDS if name not in record]
            if missing:
                raise ParseError(
                    f"{path}: corpus record on line {lineno} missing fields {missing}"
                )
            chunks.append(Chunk(**{name: record[name] for name in _CHUNK_FIELDS}))
    return chunks
