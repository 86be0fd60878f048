"""Document ingestion and segmentation.

A policy becomes a PolicyDocument holding the normalized text plus two
aligned granularities of addressable segments: paragraphs (blank-line
blocks) and sentences. Spans are half-open [start, end) offsets into the
normalized text, and sentence spans tile their paragraph span exactly so
the two granularities cover the same characters.
"""

from __future__ import annotations

import hashlib
import re
import warnings
from dataclasses import dataclass

from .errors import PolicyLintError
from .textnorm import normalize_text


class EmptyDocument(PolicyLintError):
    pass


class UnsupportedLanguage(PolicyLintError):
    pass


class UnknownSegment(PolicyLintError):
    pass


DEFAULT_LANGUAGES = frozenset({"en", "fr"})

# Abbreviations whose trailing period never ends a sentence. Matched
# casefolded, so "Art." and "art." are both covered by one entry.
ABBREVIATIONS = {
    "en": frozenset(
        {
            "e.g.", "i.e.", "art.", "arts.", "etc.", "cf.", "vs.", "no.",
            "mr.", "mrs.", "ms.", "dr.", "jr.", "sr.", "inc.", "ltd.",
            "co.", "corp.", "approx.", "para.", "sec.", "fig.", "p.", "pp.",
        }
    ),
    "fr": frozenset(
        {
            "art.", "arts.", "etc.", "cf.", "p.ex.", "c.-à-d.", "m.", "mm.",
            "mme.", "mlle.", "n°.", "ex.", "p.", "pp.", "chap.",
        }
    ),
}

_LIST_MARKER_RE = re.compile(r"^(?:[-*•‣◦]|\d{1,2}[.)])\s")
_TERMINATOR_RE = re.compile(r"[.!?]")


@dataclass(frozen=True)
class Segment:
    """One addressable unit of a document at a fixed granularity."""

    doc_id: str
    granularity: str  # "sentence" | "paragraph"
    index: int
    span: tuple[int, int]
    text: str
    parent_index: int | None = None  # enclosing paragraph, sentences only
    is_heading: bool = False
    is_list_intro: bool = False
    is_list_item: bool = False

    @property
    def segment_id(self) -> str:
        return f"{self.doc_id}:{self.granularity}:{self.index}"


@dataclass(frozen=True)
class PolicyDocument:
    doc_id: str
    raw_text: str
    language: str
    jurisdiction: str
    paragraphs: tuple[Segment, ...]
    sentences: tuple[Segment, ...]
    source_kind: str = "plain"

    def segments(self, granularity: str) -> tuple[Segment, ...]:
        if granularity == "sentence":
            return self.sentences
        if granularity == "paragraph":
            return self.paragraphs
        raise ValueError(f"unknown granularity {granularity!r}")

    def segment(self, segment_id: str) -> Segment:
        return resolve_segment(self, segment_id)


@dataclass(frozen=True)
class ContextWindow:
    target: str  # segment_id
    before: tuple[Segment, ...]
    after: tuple[Segment, ...]

    def text(self, doc: PolicyDocument) -> str:
        parts = [s.text.strip() for s in self.before]
        parts.append(resolve_segment(doc, self.target).text.strip())
        parts.extend(s.text.strip() for s in self.after)
        return " ".join(p for p in parts if p)


def primary_language(tag: str) -> str:
    """Primary subtag of a BCP-47 tag ("en-GB" -> "en")."""
    sub = tag.split("-")[0].strip().lower()
    if not sub.isalpha():
        raise UnsupportedLanguage(f"malformed language tag {tag!r}")
    return sub


def segment_sentences(paragraph_text: str, language: str = "en") -> list[tuple[int, int]]:
    """Sentence spans tiling [0, len(paragraph_text)).

    Splits after . ! ? when followed by whitespace and a capital letter or
    digit, unless the period closes a known abbreviation. The whitespace
    between sentences stays attached to the earlier sentence so spans tile
    the paragraph without gaps. Text with no terminator is one sentence.
    """
    abbrevs = ABBREVIATIONS.get(primary_language(language), ABBREVIATIONS["en"])
    text = paragraph_text
    n = len(text)
    if n == 0:
        return []
    breaks: list[int] = []
    for m in _TERMINATOR_RE.finditer(text):
        pos = m.start()
        j = pos + 1
        while j < n and text[j].isspace():
            j += 1
        if j == pos + 1 or j >= n:
            continue  # no whitespace after terminator, or end of text
        if not (text[j].isupper() or text[j].isdigit()):
            continue
        if text[pos] == "." and _trailing_abbreviation(text, pos) in abbrevs:
            continue
        breaks.append(j)
    spans = []
    start = 0
    for b in breaks:
        if b > start:
            spans.append((start, b))
            start = b
    spans.append((start, n))
    return spans


def _trailing_abbreviation(text: str, dot_pos: int) -> str:
    """Token ending at text[dot_pos] == '.', casefolded, dots included."""
    k = dot_pos - 1
    while k >= 0 and (text[k].isalnum() or text[k] in ".-'°"):
        k -= 1
    return text[k + 1 : dot_pos + 1].casefold()


def _paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Trimmed spans of blank-line separated blocks."""
    spans: list[tuple[int, int]] = []
    block_start: int | None = None
    pos = 0
    for line in text.split("\n"):
        line_end = pos + len(line)
        if line.strip():
            if block_start is None:
                block_start = pos
            block_end = line_end
        elif block_start is not None:
            spans.append((block_start, block_end))
            block_start = None
        pos = line_end + 1
    if block_start is not None:
        spans.append((block_start, block_end))
    trimmed = []
    for start, end in spans:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            trimmed.append((start, end))
    return trimmed


def ingest_text(
    raw: str,
    language: str,
    jurisdiction: str,
    *,
    doc_id: str | None = None,
    heading_paragraphs: frozenset[int] | set[int] = frozenset(),
    allowed_languages: frozenset[str] | set[str] = DEFAULT_LANGUAGES,
    source_kind: str = "plain",
) -> PolicyDocument:
    """Normalize and segment a plain-text policy.

    ``heading_paragraphs`` carries paragraph indexes marked as headings by
    the HTML extractor; plain text has no heading signal of its own.
    """
    lang = primary_language(language)
    if lang not in allowed_languages:
        raise UnsupportedLanguage(f"language {language!r} not in configured set")
    if lang not in ABBREVIATIONS:
        warnings.warn(
            f"no abbreviation list for {lang!r}; falling back to 'en'",
            stacklevel=2,
        )
    text = normalize_text(raw)
    if not any(ch.isalpha() for ch in text):
        raise EmptyDocument("document contains no letters")
    if doc_id is None:
        digest = hashlib.sha256(
            f"{text}\x00{lang}\x00{jurisdiction}".encode("utf-8")
        ).hexdigest()
        doc_id = f"doc-{digest[:16]}"
    elif ":" in doc_id:
        raise ValueError("doc_id must not contain ':'")

    para_spans = _paragraph_spans(text)
    paragraphs: list[Segment] = []
    sentences: list[Segment] = []
    for p_idx, (p_start, p_end) in enumerate(para_spans):
        p_text = text[p_start:p_end]
        heading = p_idx in heading_paragraphs
        list_item = bool(_LIST_MARKER_RE.match(p_text))
        paragraphs.append(
            Segment(
                doc_id=doc_id,
                granularity="paragraph",
                index=p_idx,
                span=(p_start, p_end),
                text=p_text,
                is_heading=heading,
                is_list_intro=p_text.rstrip().endswith(":"),
                is_list_item=list_item,
            )
        )
        for s_start, s_end in segment_sentences(p_text, lang):
            abs_span = (p_start + s_start, p_start + s_end)
            s_text = text[abs_span[0] : abs_span[1]]
            sentences.append(
                Segment(
                    doc_id=doc_id,
                    granularity="sentence",
                    index=len(sentences),
                    span=abs_span,
                    text=s_text,
                    parent_index=p_idx,
                    is_heading=heading,
                    is_list_intro=s_text.rstrip().endswith(":"),
                    is_list_item=list_item,
                )
            )
    return PolicyDocument(
        doc_id=doc_id,
        raw_text=text,
        language=lang,
        jurisdiction=jurisdiction,
        paragraphs=tuple(paragraphs),
        sentences=tuple(sentences),
        source_kind=source_kind,
    )


def resolve_segment(doc: PolicyDocument, segment_id) -> Segment:
    """Accepts a Segment, a segment_id string, or a (doc, gran, idx) tuple."""
    if isinstance(segment_id, Segment):
        segment_id = segment_id.segment_id
    if isinstance(segment_id, tuple):
        d, gran, idx = segment_id
    else:
        parts = str(segment_id).rsplit(":", 2)
        if len(parts) != 3:
            raise UnknownSegment(f"malformed segment id {segment_id!r}")
        d, gran, idx = parts
    try:
        idx = int(idx)
    except (TypeError, ValueError):
        raise UnknownSegment(f"malformed segment id {segment_id!r}") from None
    if d != doc.doc_id:
        raise UnknownSegment(f"segment {segment_id!r} is not in document {doc.doc_id}")
    pool = doc.sentences if gran == "sentence" else doc.paragraphs if gran == "paragraph" else None
    if pool is None or not 0 <= idx < len(pool):
        raise UnknownSegment(f"no such segment {segment_id!r}")
    return pool[idx]


def governing_list_intro(doc: PolicyDocument, sentence: Segment) -> Segment | None:
    """The list-intro sentence governing ``sentence``, if any.

    Same paragraph: the nearest earlier intro sentence. Across paragraphs:
    only reachable when the target sits in a list-item paragraph and every
    paragraph walked over is also a list item; headings end the search.
    """
    assert sentence.granularity == "sentence"
    para_idx = sentence.parent_index
    same_para = [
        s
        for s in doc.sentences
        if s.parent_index == para_idx and s.index < sentence.index
    ]
    for s in reversed(same_para):
        if s.is_heading:
            return None
        if s.is_list_intro:
            return s
    if not sentence.is_list_item:
        return None
    p = para_idx - 1
    while p >= 0:
        para = doc.paragraphs[p]
        if para.is_heading:
            return None
        para_sents = [s for s in doc.sentences if s.parent_index == p]
        if para_sents and para_sents[-1].is_list_intro:
            return para_sents[-1]
        if not para.is_list_item:
            return None
        p -= 1
    return None


def context_window(doc: PolicyDocument, segment_id, k: int) -> ContextWindow:
    """Context for a segment: k neighbors plus the governing list intro.

    For sentences, ``before`` stays inside the paragraph (plus the intro,
    which is always included however far back it sits) while ``after`` may
    run into following paragraphs — list items commonly live there — but
    never past a heading. Paragraph targets get k neighboring paragraphs
    bounded by headings.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    seg = resolve_segment(doc, segment_id)
    if seg.granularity == "paragraph":
        before = _bounded_neighbors(doc.paragraphs, seg.index, k, step=-1)
        after = _bounded_neighbors(doc.paragraphs, seg.index, k, step=1)
        return ContextWindow(seg.segment_id, tuple(before), tuple(after))

    same_para_before = [
        s
        for s in doc.sentences
        if s.parent_index == seg.parent_index and s.index < seg.index
    ]
    before = same_para_before[-k:] if k else []
    intro = governing_list_intro(doc, seg)
    if intro is not None and intro not in before:
        before = [intro] + before
    after = _bounded_neighbors(doc.sentences, seg.index, k, step=1)
    return ContextWindow(seg.segment_id, tuple(before), tuple(after))


def _bounded_neighbors(pool, index: int, k: int, step: int) -> list[Segment]:
    out: list[Segment] = []
    i = index + step
    while 0 <= i < len(pool) and len(out) < k:
        if pool[i].is_heading:
            break
        out.append(pool[i])
        i += step
    if step < 0:
        out.reverse()
    return out
