"""Visible-text extraction from HTML policies.

Block elements become paragraph breaks, headings are reported by paragraph
index, list items get a "- " marker so downstream list detection works the
same for HTML and plain text. script/style/head content is dropped.
"""

from __future__ import annotations

from html.parser import HTMLParser

from .errors import PolicyLintError
from .textnorm import normalize_text


class NoExtractableText(PolicyLintError):
    pass


_SKIP_TAGS = {"script", "style", "noscript", "template", "title", "head"}
_BLOCK_TAGS = {
    "p", "div", "section", "article", "header", "footer", "main", "aside",
    "nav", "ul", "ol", "li", "table", "thead", "tbody", "tr", "blockquote",
    "pre", "figure", "figcaption", "form", "fieldset", "details", "summary",
    "hr", "br", "h1", "h2", "h3", "h4", "h5", "h6",
}
_HEADING_TAGS = {"h1", "h2", "h3", "h4", "h5", "h6"}


class _BlockCollector(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.blocks: list[tuple[str, bool]] = []  # (text, is_heading)
        self._buf: list[str] = []
        self._skip_depth = 0
        self._heading_depth = 0
        self._pending_li = False

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
            return
        if tag in _BLOCK_TAGS:
            self._flush()
            if tag in _HEADING_TAGS:
                self._heading_depth += 1
            if tag == "li":
                self._pending_li = True

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag in _BLOCK_TAGS:
            self._flush()
            if tag in _HEADING_TAGS:
                self._heading_depth = max(0, self._heading_depth - 1)
            if tag == "li":
                self._pending_li = False

    def handle_data(self, data: str) -> None:
        if self._skip_depth:
            return
        if data.strip():
            if self._pending_li and not self._buf:
                self._buf.append("- ")
            self._buf.append(data)

    def _flush(self) -> None:
        text = normalize_text("".join(self._buf)).strip()
        self._buf = []
        if text:
            self.blocks.append((text, self._heading_depth > 0))


def extract_from_html(html: str) -> tuple[str, list[int]]:
    """Return (text, heading_marks).

    ``text`` is the visible content with blank-line paragraph breaks, in the
    same normal form ingest_text applies, so heading_marks (paragraph
    indexes) stay valid after ingestion. Raises NoExtractableText when
    nothing visible remains.
    """
    parser = _BlockCollector()
    parser.feed(html)
    parser.close()
    parser._flush()
    if not parser.blocks:
        raise NoExtractableText("no visible text in HTML input")
    text = "\n\n".join(block for block, _ in parser.blocks)
    headings = [i for i, (_, is_heading) in enumerate(parser.blocks) if is_heading]
    return text, headings
