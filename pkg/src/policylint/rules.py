"""Clause detection rules and the scanner that applies them.

Rules come in three kinds: single-token keywords, multi-token phrases, and
clause_similarity rules holding a reference clause matched by token 5-gram
Jaccard. Every rule carries its legal grounds (GDPR article or authority
decision), a jurisdiction, a language, and a validity interval, and the
scanner only ever applies rules effective for the requested date and the
document's jurisdiction/language.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date
from enum import IntEnum
from pathlib import Path

from . import recordio
from .document import PolicyDocument, Segment, context_window
from .errors import PolicyLintError
from .textnorm import clause_similarity, contains_token_seq, fold_tokens, tokenize, fold

DEFAULT_SIM_THRESHOLD = 0.6
DEFAULT_CONTEXT_K = 3
NGRAM_SIZE = 5


class InvalidRule(PolicyLintError):
    """Carries every violation found, not just the first."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        lines = "; ".join(f"{rid}: {reason}" for rid, reason in violations)
        super().__init__(f"invalid rules: {lines}")


class UnknownJurisdiction(PolicyLintError):
    pass


class MixedDocuments(PolicyLintError):
    pass


class ComplianceLabel(IntEnum):
    """Severity-ordered compliance verdicts."""

    COMPLIANT_UNKNOWN = 0
    PROBLEMATIC = 1
    UNLAWFUL = 2

    @property
    def wire(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: str) -> "ComplianceLabel":
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown compliance label {value!r}") from None


@dataclass(frozen=True)
class LegalBasis:
    kind: str  # "gdpr_article" | "decision"
    article: str | None = None
    decision_id: str | None = None

    def __post_init__(self):
        if self.kind == "gdpr_article":
            ok = bool(self.article) and self.decision_id is None
        elif self.kind == "decision":
            ok = bool(self.decision_id) and self.article is None
        else:
            ok = False
        if not ok:
            raise ValueError(f"malformed legal basis {self!r}")

    @classmethod
    def gdpr_article(cls, article: str) -> "LegalBasis":
        return cls(kind="gdpr_article", article=article)

    @classmethod
    def decision(cls, decision_id: str) -> "LegalBasis":
        return cls(kind="decision", decision_id=decision_id)

    def sort_key(self) -> tuple[str, str]:
        return (self.kind, self.article or self.decision_id or "")

    def to_json(self) -> dict:
        if self.kind == "gdpr_article":
            return {"kind": "gdpr_article", "article": self.article}
        return {"kind": "decision", "decision_id": self.decision_id}

    @classmethod
    def from_json(cls, obj: dict) -> "LegalBasis":
        return cls(
            kind=obj.get("kind", ""),
            article=obj.get("article"),
            decision_id=obj.get("decision_id"),
        )


@dataclass(frozen=True)
class Rule:
    rule_id: str
    kind: str  # "keyword" | "phrase" | "clause_similarity"
    pattern: str
    label: ComplianceLabel
    grounds: tuple[LegalBasis, ...]
    jurisdiction: str
    language: str
    effective_from: date
    effective_until: date | None = None
    weight: float = 1.0
    translation_of: str | None = None
    # Patterns that, matched in a list-intro segment's context window,
    # exempt the keyword match (the enumeration resolves the vagueness).
    context_exempt: tuple[str, ...] = ()


@dataclass(frozen=True)
class RuleMatch:
    rule_id: str
    span: tuple[int, int]
    similarity: float


@dataclass(frozen=True)
class Finding:
    finding_id: str
    doc_id: str
    segment_id: str
    label: ComplianceLabel
    grounds: tuple[LegalBasis, ...]
    matched_rules: tuple[RuleMatch, ...]
    confidence: float
    context_used: bool = False
    granularity: str = "sentence"
    segment_index: int = 0


@dataclass(frozen=True)
class JurisdictionTable:
    member_states: frozenset[str]
    other: frozenset[str] = frozenset()

    @property
    def known(self) -> frozenset[str]:
        return self.member_states | self.other | {"EU"}

    @classmethod
    def from_file(cls, path: str | Path) -> "JurisdictionTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            member_states=frozenset(data["member_states"]),
            other=frozenset(data.get("other", ())),
        )

    def applies(self, rule_jurisdiction: str, doc_jurisdiction: str) -> bool:
        if doc_jurisdiction not in self.known:
            raise UnknownJurisdiction(f"unknown jurisdiction {doc_jurisdiction!r}")
        if rule_jurisdiction == doc_jurisdiction:
            return True
        return rule_jurisdiction == "EU" and doc_jurisdiction in self.member_states


# EU membership as shipped configuration; overridable via a jurisdictions file.
DEFAULT_JURISDICTIONS = JurisdictionTable(
    member_states=frozenset(
        {
            "AT", "BE", "BG", "HR", "CY", "CZ", "DE", "DK", "EE", "ES", "FI",
            "FR", "GR", "HU", "IE", "IT", "LT", "LU", "LV", "MT", "NL", "PL",
            "PT", "RO", "SE", "SI", "SK",
        }
    ),
    other=frozenset({"GB", "CH", "NO", "IS", "LI", "US"}),
)


@dataclass(frozen=True)
class CompiledRule:
    rule: Rule
    pattern_tokens: tuple[str, ...]
    exempt_token_seqs: tuple[tuple[str, ...], ...] = ()

    @property
    def rule_id(self) -> str:
        return self.rule.rule_id


@dataclass(frozen=True)
class CompiledRuleSet:
    rules: tuple[CompiledRule, ...]
    keyword_index: dict[str, tuple[CompiledRule, ...]] = field(default_factory=dict)
    phrase_index: dict[str, tuple[CompiledRule, ...]] = field(default_factory=dict)
    clause_rules: tuple[CompiledRule, ...] = ()

    def __len__(self) -> int:
        return len(self.rules)


def compile_rules(rules: list[Rule] | tuple[Rule, ...]) -> CompiledRuleSet:
    """Validate every rule invariant, then index patterns for scanning."""
    violations: list[tuple[str, str]] = []
    seen: set[str] = set()
    compiled: list[CompiledRule] = []
    for rule in rules:
        rid = rule.rule_id
        if not rid:
            violations.append(("<missing>", "empty rule_id"))
            continue
        if rid in seen:
            violations.append((rid, "duplicate rule_id"))
        seen.add(rid)
        if rule.kind not in ("keyword", "phrase", "clause_similarity"):
            violations.append((rid, f"unknown kind {rule.kind!r}"))
            continue
        tokens = tuple(fold_tokens(rule.pattern))
        if not tokens:
            violations.append((rid, "pattern has no tokens"))
        if rule.kind == "keyword" and len(tokens) != 1:
            violations.append((rid, "keyword pattern must be a single token"))
        if rule.kind == "phrase" and len(tokens) < 2:
            violations.append((rid, "phrase pattern needs at least two tokens"))
        if rule.label == ComplianceLabel.UNLAWFUL and not any(
            g.kind == "decision" for g in rule.grounds
        ):
            violations.append((rid, "unlawful label requires a decision ground"))
        if rule.translation_of and rule.label == ComplianceLabel.UNLAWFUL:
            violations.append((rid, "translated rules cannot be labeled unlawful"))
        if rule.effective_until is not None and not rule.effective_from < rule.effective_until:
            violations.append((rid, "effective_from must precede effective_until"))
        if not 0.0 < rule.weight <= 1.0:
            violations.append((rid, f"weight {rule.weight} outside (0, 1]"))
        if not rule.jurisdiction:
            violations.append((rid, "missing jurisdiction"))
        if not rule.language:
            violations.append((rid, "missing language"))
        exempts = tuple(
            seq for seq in (tuple(fold_tokens(p)) for p in rule.context_exempt) if seq
        )
        compiled.append(CompiledRule(rule=rule, pattern_tokens=tokens, exempt_token_seqs=exempts))
    if violations:
        raise InvalidRule(violations)

    kw: dict[str, list[CompiledRule]] = {}
    ph: dict[str, list[CompiledRule]] = {}
    clause: list[CompiledRule] = []
    for cr in compiled:
        if cr.rule.kind == "keyword":
            kw.setdefault(cr.pattern_tokens[0], []).append(cr)
        elif cr.rule.kind == "phrase":
            ph.setdefault(cr.pattern_tokens[0], []).append(cr)
        else:
            clause.append(cr)
    return CompiledRuleSet(
        rules=tuple(compiled),
        keyword_index={k: tuple(v) for k, v in kw.items()},
        phrase_index={k: tuple(v) for k, v in ph.items()},
        clause_rules=tuple(clause),
    )


def effective_rules(
    ruleset: CompiledRuleSet,
    as_of: date,
    jurisdiction: str,
    language: str,
    table: JurisdictionTable = DEFAULT_JURISDICTIONS,
) -> CompiledRuleSet:
    """Rules valid on as_of for the given jurisdiction and language."""
    if jurisdiction not in table.known:
        raise UnknownJurisdiction(f"unknown jurisdiction {jurisdiction!r}")
    lang = language.split("-")[0].lower()
    keep = []
    for cr in ruleset.rules:
        r = cr.rule
        if not r.effective_from <= as_of:
            continue
        if r.effective_until is not None and not as_of < r.effective_until:
            continue
        if r.language.split("-")[0].lower() != lang:
            continue
        if not table.applies(r.jurisdiction, jurisdiction):
            continue
        keep.append(cr.rule)
    return compile_rules(keep)


def scan(
    doc: PolicyDocument,
    ruleset: CompiledRuleSet,
    as_of: date,
    granularity: str = "sentence",
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
    *,
    use_context: bool = True,
    context_k: int = DEFAULT_CONTEXT_K,
    jurisdictions: JurisdictionTable = DEFAULT_JURISDICTIONS,
) -> list[Finding]:
    """Match every effective rule against every segment.

    Produces one Finding per (segment, label) with grounds merged across
    the matching rules. A list-intro sentence matched only by keyword rules
    is re-checked against its context window: when a matched rule's
    context_exempt pattern occurs in the window (the following enumeration
    makes the clause concrete), that rule's match is dropped.
    """
    if not 0.0 < sim_threshold <= 1.0:
        raise ValueError("sim_threshold must be in (0, 1]")
    effective = effective_rules(
        ruleset, as_of, doc.jurisdiction, doc.language, jurisdictions
    )
    findings: list[Finding] = []
    for seg in doc.segments(granularity):
        matches = _segment_matches(seg, effective, sim_threshold)
        context_applied = False
        if (
            use_context
            and granularity == "sentence"
            and seg.is_list_intro
            and matches
            and all(cr.rule.kind == "keyword" for cr, _, _ in matches)
        ):
            matches = _apply_context_guard(doc, seg, matches, context_k)
            context_applied = True
        findings.extend(_findings_for_segment(seg, matches, context_applied))
    findings.sort(key=lambda f: (f.segment_index, f.label))
    return findings


def _segment_matches(
    seg: Segment, ruleset: CompiledRuleSet, sim_threshold: float
) -> list[tuple[CompiledRule, tuple[int, int], float]]:
    tokens = tokenize(seg.text)
    folded = [fold(t.text) for t in tokens]
    base = seg.span[0]
    matches: list[tuple[CompiledRule, tuple[int, int], float]] = []
    for i, tok in enumerate(folded):
        for cr in ruleset.keyword_index.get(tok, ()):
            span = (base + tokens[i].start, base + tokens[i].end)
            matches.append((cr, span, 1.0))
        for cr in ruleset.phrase_index.get(tok, ()):
            k = len(cr.pattern_tokens)
            if tuple(folded[i : i + k]) == cr.pattern_tokens:
                span = (base + tokens[i].start, base + tokens[i + k - 1].end)
                matches.append((cr, span, 1.0))
    for cr in ruleset.clause_rules:
        sim = clause_similarity(folded, list(cr.pattern_tokens), NGRAM_SIZE)
        if sim >= sim_threshold:
            matches.append((cr, seg.span, sim))
    return matches


def _apply_context_guard(doc, seg, matches, context_k):
    window = context_window(doc, seg.segment_id, context_k)
    window_tokens = fold_tokens(window.text(doc))
    kept = []
    for cr, span, sim in matches:
        exempt = any(
            contains_token_seq(window_tokens, pat) for pat in cr.exempt_token_seqs
        )
        if not exempt:
            kept.append((cr, span, sim))
    return kept


def _findings_for_segment(seg, matches, context_applied) -> list[Finding]:
    by_label: dict[ComplianceLabel, list] = {}
    for m in matches:
        by_label.setdefault(m[0].rule.label, []).append(m)
    out = []
    for label in sorted(by_label):
        group = by_label[label]
        grounds = sorted(
            {g for cr, _, _ in group for g in cr.rule.grounds},
            key=LegalBasis.sort_key,
        )
        rule_matches = tuple(
            sorted(
                (RuleMatch(cr.rule_id, span, sim) for cr, span, sim in group),
                key=lambda rm: (rm.rule_id, rm.span),
            )
        )
        out.append(
            Finding(
                finding_id=f"{seg.segment_id}:{label.wire}",
                doc_id=seg.doc_id,
                segment_id=seg.segment_id,
                label=label,
                grounds=tuple(grounds),
                matched_rules=rule_matches,
                confidence=max(cr.rule.weight for cr, _, _ in group),
                context_used=context_applied,
                granularity=seg.granularity,
                segment_index=seg.index,
            )
        )
    return out


def merge_grounds(findings: list[Finding]) -> list[Finding]:
    """Collapse findings on the same segment into one multi-ground finding.

    Label becomes the severity maximum, grounds the set union, confidence
    the maximum across the merged findings; output is ordered by segment
    index.
    """
    if not findings:
        return []
    doc_ids = {f.doc_id for f in findings}
    if len(doc_ids) > 1:
        raise MixedDocuments(f"findings span documents {sorted(doc_ids)}")
    by_segment: dict[str, list[Finding]] = {}
    for f in findings:
        by_segment.setdefault(f.segment_id, []).append(f)
    merged = []
    for segment_id, group in by_segment.items():
        first = group[0]
        grounds = sorted({g for f in group for g in f.grounds}, key=LegalBasis.sort_key)
        rule_matches = tuple(
            sorted(
                {rm for f in group for rm in f.matched_rules},
                key=lambda rm: (rm.rule_id, rm.span),
            )
        )
        merged.append(
            Finding(
                finding_id=segment_id,
                doc_id=first.doc_id,
                segment_id=segment_id,
                label=max(f.label for f in group),
                grounds=tuple(grounds),
                matched_rules=rule_matches,
                confidence=max(f.confidence for f in group),
                context_used=any(f.context_used for f in group),
                granularity=first.granularity,
                segment_index=first.segment_index,
            )
        )
    merged.sort(key=lambda f: f.segment_index)
    return merged


# --- rule file round trip ---------------------------------------------------


def rule_to_json(rule: Rule) -> dict:
    return {
        "rule_id": rule.rule_id,
        "kind": rule.kind,
        "pattern": rule.pattern,
        "label": rule.label.wire,
        "grounds": [g.to_json() for g in rule.grounds],
        "jurisdiction": rule.jurisdiction,
        "language": rule.language,
        "effective_from": rule.effective_from.isoformat(),
        "effective_until": rule.effective_until.isoformat() if rule.effective_until else None,
        "weight": float(rule.weight),
        "translation_of": rule.translation_of,
        "context_exempt": list(rule.context_exempt),
    }


def rule_from_json(obj: dict) -> Rule:
    until = obj.get("effective_until")
    return Rule(
        rule_id=obj["rule_id"],
        kind=obj["kind"],
        pattern=obj["pattern"],
        label=ComplianceLabel.parse(obj["label"]),
        grounds=tuple(LegalBasis.from_json(g) for g in obj.get("grounds", ())),
        jurisdiction=obj["jurisdiction"],
        language=obj["language"],
        effective_from=date.fromisoformat(obj["effective_from"]),
        effective_until=date.fromisoformat(until) if until else None,
        weight=float(obj.get("weight", 1.0)),
        translation_of=obj.get("translation_of"),
        context_exempt=tuple(obj.get("context_exempt", ())),
    )


def load_rules_file(path: str | Path) -> list[Rule]:
    records = recordio.read_records(path, "rules")
    rules = []
    problems = []
    for rec in records:
        try:
            rules.append(rule_from_json(rec))
        except (KeyError, ValueError) as exc:
            problems.append((str(rec.get("rule_id", "<missing>")), str(exc)))
    if problems:
        raise InvalidRule(problems)
    return rules


def save_rules_file(path: str | Path, rules: list[Rule]) -> None:
    recordio.write_records(path, "rules", [rule_to_json(r) for r in rules])


def reweighted(rules: list[Rule], weights: dict[str, float]) -> list[Rule]:
    """Apply feedback-recalibrated weights on top of file weights."""
    return [
        replace(r, weight=weights[r.rule_id]) if r.rule_id in weights else r
        for r in rules
    ]
