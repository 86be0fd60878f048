"""Text normalization and tokenization shared by every matching path.

All matching (rules, checklist detectors, lexicon, classifier) must agree on
what a token is, so the word rule lives here: a maximal run of
letters/digits joined by apostrophes or hyphens. Comparison forms are NFKC +
casefold so curly quotes, ligatures and case differences never defeat a
pattern.
"""

from __future__ import annotations

import re
import unicodedata
from typing import NamedTuple

# Letters or digits (no underscore), optionally chained with ' ’ or -.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")
_SPACE_RUN_RE = re.compile(r"[ \t]+")


class Token(NamedTuple):
    text: str
    start: int
    end: int


def normalize_text(raw: str) -> str:
    """Unicode NFKC, CRLF -> LF, collapse space/tab runs within lines."""
    text = unicodedata.normalize("NFKC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return _SPACE_RUN_RE.sub(" ", text)


def fold(text: str) -> str:
    """Comparison form: NFKC + casefold."""
    return unicodedata.normalize("NFKC", text).casefold()


def tokenize(text: str) -> list[Token]:
    """Word tokens with [start, end) character offsets into ``text``."""
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def fold_tokens(text: str) -> list[str]:
    return [fold(t.text) for t in tokenize(text)]


def normalize_clause(text: str) -> str:
    """Dedup key for clause texts: folded tokens joined by single spaces."""
    return " ".join(fold_tokens(text))


def token_ngrams(tokens: list[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def jaccard(a: set, b: set) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def clause_similarity(tokens_a: list[str], tokens_b: list[str], n: int = 5) -> float:
    """Jaccard over token n-grams; short texts fall back to token sets.

    The fallback applies when either side is shorter than n tokens, since an
    n-gram set over a shorter text is empty and would never match anything.
    """
    if min(len(tokens_a), len(tokens_b)) < n:
        return jaccard(set(tokens_a), set(tokens_b))
    return jaccard(token_ngrams(tokens_a, n), token_ngrams(tokens_b, n))


def contains_token_seq(haystack: list[str], needle: tuple[str, ...]) -> bool:
    """True if ``needle`` occurs as a contiguous run in ``haystack``."""
    if not needle:
        return False
    k = len(needle)
    return any(tuple(haystack[i : i + k]) == needle for i in range(len(haystack) - k + 1))
