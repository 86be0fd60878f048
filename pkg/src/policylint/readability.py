"""Readability scoring: Flesch Reading Ease, Flesch-Kincaid grade, and a
legal-lexicon-adjusted variant.

General-purpose formulas understate how hard legal text is, so the adjusted
score subtracts a penalty proportional to the density of legal terms found
via a configurable lexicon. Document-level scores pool raw counts rather
than averaging paragraph scores, which keeps them invariant to how the text
is split into paragraphs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .document import PolicyDocument
from .errors import PolicyLintError
from .textnorm import fold, fold_tokens, tokenize


class NotAWord(PolicyLintError):
    pass


class DegenerateCounts(PolicyLintError):
    pass


DEFAULT_PENALTY = 2.0

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class ReadabilityCounts:
    words: int
    sentences: int
    syllables: int
    legal_terms: int = 0


@dataclass(frozen=True)
class ReadabilityScore:
    fre: float
    fkgl: float
    adjusted_fre: float
    unit: str  # "segment" | "document"
    index: int | None = None  # paragraph index for segment scores


def count_syllables(word: str) -> int:
    """Vowel-group heuristic: maximal a/e/i/o/u/y runs, minus a terminal
    silent 'e' unless that would leave zero, never below 1."""
    w = fold(word)
    if not any(c.isalpha() for c in w):
        raise NotAWord(f"{word!r} contains no letters")
    groups = len(_VOWEL_GROUP_RE.findall(w))
    if groups > 1 and w.endswith("e"):
        groups -= 1
    return max(groups, 1)


def _token_syllables(token: str) -> int:
    # Digit-only tokens ("15") still occupy at least one spoken syllable.
    if any(c.isalpha() for c in token):
        return count_syllables(token)
    return 1


def flesch_scores(counts: ReadabilityCounts, unit: str = "segment") -> ReadabilityScore:
    """Standard Flesch Reading Ease and Flesch-Kincaid Grade Level."""
    w, s, y = counts.words, counts.sentences, counts.syllables
    if w == 0 or s == 0:
        raise DegenerateCounts(f"cannot score W={w}, S={s}")
    fre = 206.835 - 1.015 * (w / s) - 84.6 * (y / w)
    fkgl = 0.39 * (w / s) + 11.8 * (y / w) - 15.59
    return ReadabilityScore(fre=fre, fkgl=fkgl, adjusted_fre=fre, unit=unit)


def adjusted_score(counts: ReadabilityCounts, penalty: float = DEFAULT_PENALTY) -> float:
    """FRE minus penalty * percentage of legal-term occurrences."""
    if penalty < 0:
        raise ValueError("penalty must be >= 0")
    base = flesch_scores(counts)
    return base.fre - penalty * (100.0 * counts.legal_terms / counts.words)


class LegalLexicon:
    """Case-insensitive term list; multiword terms match as token runs."""

    def __init__(self, terms: list[str] | tuple[str, ...] = ()):
        seqs = {tuple(fold_tokens(t)) for t in terms}
        seqs.discard(())
        # longest-first so greedy counting prefers the most specific term
        self.term_seqs: tuple[tuple[str, ...], ...] = tuple(
            sorted(seqs, key=lambda s: (-len(s), s))
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "LegalLexicon":
        terms = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                terms.append(line)
        return cls(terms)

    def __len__(self) -> int:
        return len(self.term_seqs)

    def count_occurrences(self, folded_tokens: list[str]) -> int:
        """Non-overlapping greedy matches; each occurrence counts once."""
        count = 0
        i = 0
        n = len(folded_tokens)
        while i < n:
            for seq in self.term_seqs:
                k = len(seq)
                if tuple(folded_tokens[i : i + k]) == seq:
                    count += 1
                    i += k
                    break
            else:
                i += 1
        return count


EMPTY_LEXICON = LegalLexicon()


def _paragraph_counts(
    doc: PolicyDocument, para_index: int, lexicon: LegalLexicon
) -> ReadabilityCounts | None:
    """Counts for one paragraph, or None when it holds no words at all."""
    words = 0
    sentences = 0
    syllables = 0
    for sent in doc.sentences:
        if sent.parent_index != para_index:
            continue
        tokens = tokenize(sent.text)
        if not tokens:
            continue
        sentences += 1
        words += len(tokens)
        syllables += sum(_token_syllables(t.text) for t in tokens)
    if words == 0:
        return None
    folded = fold_tokens(doc.paragraphs[para_index].text)
    return ReadabilityCounts(
        words=words,
        sentences=max(sentences, 1),
        syllables=syllables,
        legal_terms=lexicon.count_occurrences(folded),
    )


def score_document(
    doc: PolicyDocument,
    lexicon: LegalLexicon = EMPTY_LEXICON,
    penalty: float = DEFAULT_PENALTY,
) -> list[ReadabilityScore]:
    """One score per scorable paragraph plus a document score, last.

    The document score is computed from pooled counts, not averaged
    paragraph scores. Paragraphs without a single word token are skipped.
    """
    scores: list[ReadabilityScore] = []
    total = ReadabilityCounts(0, 0, 0, 0)
    for para in doc.paragraphs:
        counts = _paragraph_counts(doc, para.index, lexicon)
        if counts is None:
            continue
        total = ReadabilityCounts(
            total.words + counts.words,
            total.sentences + counts.sentences,
            total.syllables + counts.syllables,
            total.legal_terms + counts.legal_terms,
        )
        base = flesch_scores(counts)
        scores.append(
            ReadabilityScore(
                fre=base.fre,
                fkgl=base.fkgl,
                adjusted_fre=adjusted_score(counts, penalty),
                unit="segment",
                index=para.index,
            )
        )
    doc_base = flesch_scores(total, unit="document")
    scores.append(
        ReadabilityScore(
            fre=doc_base.fre,
            fkgl=doc_base.fkgl,
            adjusted_fre=adjusted_score(total, penalty),
            unit="document",
        )
    )
    return scores


def document_score(scores: list[ReadabilityScore]) -> ReadabilityScore:
    for s in scores:
        if s.unit == "document":
            return s
    raise DegenerateCounts("no document-level score present")
