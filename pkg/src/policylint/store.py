"""Persistent legal knowledge: decisions, derived rules, clauses, feedback.

Everything mutable is an append-only log under the store directory; the
in-memory rule table is a pure fold over decisions.log and feedback.log, so
opening a store replays its history and two replays of the same logs yield
byte-identical rule snapshots. Stored analysis reports live beside the logs
and are never rewritten, which keeps historical scan results stable no
matter what decisions arrive later.

Rule lifecycle: an annulment creates (or extends the grounds of) an
unlawful clause_similarity rule; a validation closes matching rules it
dominates by (authority level, date); an overruling closes every rule
grounded solely in the overruled decision. A validation that cannot close a
rule it targets is logged as a conflict, and a same-level, same-date,
same-jurisdiction collision is surfaced as ConflictUnresolvable.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from pathlib import Path

from . import recordio
from .classifier import LabeledClause, clause_from_json, clause_to_json
from .errors import PolicyLintError
from .rules import (
    DEFAULT_SIM_THRESHOLD,
    ComplianceLabel,
    LegalBasis,
    Rule,
    rule_to_json,
)
from .textnorm import clause_similarity, fold_tokens, normalize_clause

AUTHORITY_LEVELS = {
    "dpa": 1,
    "first_instance": 2,
    "appeal": 3,
    "supreme": 4,
    "cjeu": 5,
}
_LEVEL_NAMES = {v: k for k, v in AUTHORITY_LEVELS.items()}

DISPOSITIONS = ("annuls_clause", "validates_clause", "overrules_decision")


class InvalidDecision(PolicyLintError):
    pass


class UnknownTargetDecision(PolicyLintError):
    pass


class ConflictUnresolvable(PolicyLintError):
    pass


class UnknownFinding(PolicyLintError):
    pass


class DuplicateVerdict(PolicyLintError):
    pass


class InvalidFeedback(PolicyLintError):
    pass


class UnmappedCategory(PolicyLintError):
    pass


class InvalidGuideline(PolicyLintError):
    pass


@dataclass(frozen=True)
class DecisionRecord:
    decision_id: str
    authority: str
    authority_level: int  # 1 dpa .. 5 cjeu
    jurisdiction: str
    date: date
    disposition: str
    target: str  # clause text, or decision_id for overrules_decision
    notes: str = ""
    language: str = "en"  # language of the target clause

    @property
    def level_name(self) -> str:
        return _LEVEL_NAMES.get(self.authority_level, str(self.authority_level))


@dataclass(frozen=True)
class FeedbackRecord:
    feedback_id: str
    doc_id: str
    finding_id: str
    reviewer: str
    verdict: str  # "confirm" | "reject"
    note: str = ""
    timestamp: str = ""  # ISO-8601


@dataclass(frozen=True)
class AnnotationGuideline:
    version: int
    criteria: tuple[str, ...]


@dataclass(frozen=True)
class ImportResult:
    added: int
    skipped_duplicates: int = 0
    skipped_unmapped: int = 0


def decision_to_json(d: DecisionRecord) -> dict:
    return {
        "decision_id": d.decision_id,
        "authority": d.authority,
        "authority_level": d.level_name,
        "jurisdiction": d.jurisdiction,
        "date": d.date.isoformat(),
        "disposition": d.disposition,
        "target": d.target,
        "notes": d.notes,
        "language": d.language,
    }


def decision_from_json(obj: dict) -> DecisionRecord:
    level = obj["authority_level"]
    if isinstance(level, str):
        try:
            level = AUTHORITY_LEVELS[level]
        except KeyError:
            raise InvalidDecision(f"unknown authority level {level!r}") from None
    return DecisionRecord(
        decision_id=obj["decision_id"],
        authority=obj.get("authority", ""),
        authority_level=int(level),
        jurisdiction=obj["jurisdiction"],
        date=date.fromisoformat(obj["date"]),
        disposition=obj["disposition"],
        target=obj["target"],
        notes=obj.get("notes", ""),
        language=obj.get("language", "en"),
    )


def load_decisions_file(path: str | Path) -> list[DecisionRecord]:
    return [decision_from_json(rec) for rec in recordio.read_records(path, "decisions")]


def feedback_weight(confirms: int, rejects: int) -> float:
    """Add-one proportion over a rule's verdict history; always in (0, 1)."""
    return (1 + confirms) / (2 + confirms + rejects)


class KnowledgeStore:
    """Single-writer store over a directory of append-only logs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "reports").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self.decisions: dict[str, DecisionRecord] = {}
        self.rules: dict[str, Rule] = {}
        self.feedback_counts: dict[str, list[int]] = {}  # rule_id -> [confirms, rejects]
        self.clauses: list[LabeledClause] = []
        self._clause_keys: set[str] = set()
        self.guidelines: list[AnnotationGuideline] = []
        self._verdict_keys: set[tuple[str, str, str]] = set()
        self._reviewer_last_ts: dict[str, str] = {}
        self._audit_seq = 0
        self._feedback_seq = 0
        self._replay()

    # --- paths -----------------------------------------------------------

    @property
    def decisions_log(self) -> Path:
        return self.root / "decisions.log"

    @property
    def feedback_log(self) -> Path:
        return self.root / "feedback.log"

    @property
    def audit_log(self) -> Path:
        return self.root / "audit.log"

    @property
    def clauses_file(self) -> Path:
        return self.root / "clauses.jsonl"

    @property
    def guidelines_file(self) -> Path:
        return self.root / "guidelines.jsonl"

    def _report_path(self, doc_id: str) -> Path:
        if "/" in doc_id or "\\" in doc_id or doc_id.startswith("."):
            raise UnknownFinding(f"invalid doc id {doc_id!r}")
        return self.root / "reports" / f"{doc_id}.json"

    # --- replay ----------------------------------------------------------

    def _replay(self) -> None:
        if self.decisions_log.exists():
            for rec in recordio.read_records(self.decisions_log, "decisions"):
                self._apply_decision(decision_from_json(rec), log=False)
        if self.feedback_log.exists():
            for rec in recordio.read_records(self.feedback_log, "feedback"):
                fb = FeedbackRecord(
                    feedback_id=rec["feedback_id"],
                    doc_id=rec["doc_id"],
                    finding_id=rec["finding_id"],
                    reviewer=rec["reviewer"],
                    verdict=rec["verdict"],
                    note=rec.get("note", ""),
                    timestamp=rec.get("timestamp", ""),
                )
                self._apply_feedback(fb, rec.get("rule_ids", []), log=False)
                self._feedback_seq += 1
        if self.clauses_file.exists():
            for rec in recordio.read_records(self.clauses_file, "clauses"):
                clause = clause_from_json(rec)
                self.clauses.append(clause)
                self._clause_keys.add(normalize_clause(clause.text))
        if self.guidelines_file.exists():
            for rec in recordio.read_records(self.guidelines_file, "guidelines"):
                self.guidelines.append(
                    AnnotationGuideline(
                        version=int(rec["version"]), criteria=tuple(rec["criteria"])
                    )
                )

    # --- audit -----------------------------------------------------------

    def _audit(self, action: str, log: bool, **detail) -> None:
        self._audit_seq += 1
        if log:
            recordio.append_record(
                self.audit_log, "audit", {"seq": self._audit_seq, "action": action, **detail}
            )

    # --- decisions -------------------------------------------------------

    def record_decision(self, decision: DecisionRecord) -> list[str]:
        """Apply a decision to the rule table; returns affected rule ids."""
        with self._lock:
            affected = self._apply_decision(decision, log=True)
            recordio.append_record(
                self.decisions_log, "decisions", decision_to_json(decision)
            )
            return affected

    def _validate_decision(self, decision: DecisionRecord) -> None:
        if decision.decision_id in self.decisions:
            raise InvalidDecision(f"duplicate decision id {decision.decision_id!r}")
        if decision.disposition not in DISPOSITIONS:
            raise InvalidDecision(f"unknown disposition {decision.disposition!r}")
        if decision.authority_level not in _LEVEL_NAMES:
            raise InvalidDecision(f"authority level {decision.authority_level} out of range")
        if decision.date > date.today():
            raise InvalidDecision(f"decision {decision.decision_id} is dated in the future")
        if not decision.target.strip():
            raise InvalidDecision("decision has an empty target")

    def _apply_decision(self, decision: DecisionRecord, log: bool) -> list[str]:
        self._validate_decision(decision)
        if decision.disposition == "annuls_clause":
            affected = self._apply_annulment(decision, log)
        elif decision.disposition == "validates_clause":
            affected = self._apply_validation(decision, log)
        else:
            affected = self._apply_overruling(decision, log)
        self.decisions[decision.decision_id] = decision
        return sorted(affected)

    def _apply_annulment(self, decision: DecisionRecord, log: bool) -> list[str]:
        key = normalize_clause(decision.target)
        for rule_id, rule in self.rules.items():
            if (
                rule.label == ComplianceLabel.UNLAWFUL
                and rule.effective_until is None
                and rule.jurisdiction == decision.jurisdiction
                and normalize_clause(rule.pattern) == key
            ):
                ground = LegalBasis.decision(decision.decision_id)
                if ground not in rule.grounds:
                    self.rules[rule_id] = replace(rule, grounds=rule.grounds + (ground,))
                    self._audit(
                        "extend_rule_grounds",
                        log,
                        rule_id=rule_id,
                        decision_id=decision.decision_id,
                    )
                return [rule_id]
        rule_id = f"dec-{decision.decision_id}"
        self.rules[rule_id] = Rule(
            rule_id=rule_id,
            kind="clause_similarity",
            pattern=decision.target,
            label=ComplianceLabel.UNLAWFUL,
            grounds=(LegalBasis.decision(decision.decision_id),),
            jurisdiction=decision.jurisdiction,
            language=decision.language,
            effective_from=decision.date,
        )
        self._audit("create_rule", log, rule_id=rule_id, decision_id=decision.decision_id)
        return [rule_id]

    def _strongest_ground(self, rule: Rule) -> tuple[int, date] | None:
        grounds = [
            self.decisions[g.decision_id]
            for g in rule.grounds
            if g.kind == "decision" and g.decision_id in self.decisions
        ]
        if not grounds:
            return None
        best = max(grounds, key=lambda d: (d.authority_level, d.date))
        return best.authority_level, best.date

    def _matching_unlawful_rules(self, decision: DecisionRecord) -> list[Rule]:
        target_tokens = fold_tokens(decision.target)
        out = []
        for rule in self.rules.values():
            if rule.label != ComplianceLabel.UNLAWFUL or rule.effective_until is not None:
                continue
            if decision.jurisdiction not in (rule.jurisdiction, "EU"):
                continue
            sim = clause_similarity(target_tokens, fold_tokens(rule.pattern))
            if sim >= DEFAULT_SIM_THRESHOLD:
                out.append(rule)
        return out

    def _apply_validation(self, decision: DecisionRecord, log: bool) -> list[str]:
        candidates = self._matching_unlawful_rules(decision)
        plan: list[tuple[Rule, str]] = []
        for rule in candidates:
            strongest = self._strongest_ground(rule)
            if strongest is None:
                continue
            level, ground_date = strongest
            mine = (decision.authority_level, decision.date)
            if mine == (level, ground_date) and decision.jurisdiction == rule.jurisdiction:
                raise ConflictUnresolvable(
                    f"decision {decision.decision_id} conflicts with the grounds of rule "
                    f"{rule.rule_id} at the same level, date, and jurisdiction"
                )
            if mine > (level, ground_date):
                if decision.date > rule.effective_from:
                    plan.append((rule, "close"))
                else:
                    # Dominates on level but predates the rule: closing would
                    # invert the validity interval, so it only gets logged.
                    plan.append((rule, "stale"))
            else:
                plan.append((rule, "dominated"))
        affected = []
        for rule, action in plan:
            if action == "close":
                self.rules[rule.rule_id] = replace(rule, effective_until=decision.date)
                self._audit(
                    "close_rule",
                    log,
                    rule_id=rule.rule_id,
                    decision_id=decision.decision_id,
                    effective_until=decision.date.isoformat(),
                )
                affected.append(rule.rule_id)
            else:
                self._audit(
                    "conflict",
                    log,
                    rule_id=rule.rule_id,
                    decision_id=decision.decision_id,
                    reason=f"{action} validation",
                )
        return affected

    def _apply_overruling(self, decision: DecisionRecord, log: bool) -> list[str]:
        target_id = decision.target.strip()
        if target_id not in self.decisions:
            raise UnknownTargetDecision(f"no decision {target_id!r} to overrule")
        affected = []
        for rule_id, rule in self.rules.items():
            if rule.effective_until is not None:
                continue
            decision_grounds = {g.decision_id for g in rule.grounds if g.kind == "decision"}
            if decision_grounds == {target_id} and decision.date > rule.effective_from:
                self.rules[rule_id] = replace(rule, effective_until=decision.date)
                self._audit(
                    "close_rule",
                    log,
                    rule_id=rule_id,
                    decision_id=decision.decision_id,
                    reason=f"overrules {target_id}",
                    effective_until=decision.date.isoformat(),
                )
                affected.append(rule_id)
        return affected

    def detect_inconsistencies(self) -> list[tuple[str, str, str]]:
        """Annul/validate pairs over similar clauses where neither decision
        dominates by (authority level, date)."""
        annuls = [d for d in self.decisions.values() if d.disposition == "annuls_clause"]
        validates = [d for d in self.decisions.values() if d.disposition == "validates_clause"]
        flagged = []
        for da in annuls:
            ta = fold_tokens(da.target)
            for dv in validates:
                sim = clause_similarity(ta, fold_tokens(dv.target))
                if sim < DEFAULT_SIM_THRESHOLD:
                    continue
                ka = (da.authority_level, da.date)
                kv = (dv.authority_level, dv.date)
                if ka > kv or kv > ka:
                    continue
                flagged.append(
                    (
                        da.decision_id,
                        dv.decision_id,
                        f"annulment and validation of similar clauses at equal "
                        f"level {da.level_name} on {da.date.isoformat()}",
                    )
                )
        flagged.sort()
        return flagged

    # --- feedback ----------------------------------------------------------

    def new_feedback_id(self) -> str:
        return f"fb-{self._feedback_seq + 1:06d}"

    def record_feedback(self, fb: FeedbackRecord) -> dict[str, float]:
        """Record a reviewer verdict; returns the recalibrated weight of
        every rule behind the finding."""
        with self._lock:
            finding = self.find_finding(fb.doc_id, fb.finding_id)
            if finding is None:
                raise UnknownFinding(f"no finding {fb.finding_id!r} in {fb.doc_id!r}")
            rule_ids = sorted({m["rule_id"] for m in finding.get("matched_rules", [])})
            weights = self._apply_feedback(fb, rule_ids, log=True)
            self._feedback_seq += 1
            record = {
                "feedback_id": fb.feedback_id,
                "doc_id": fb.doc_id,
                "finding_id": fb.finding_id,
                "reviewer": fb.reviewer,
                "verdict": fb.verdict,
                "note": fb.note,
                "timestamp": fb.timestamp,
                "rule_ids": rule_ids,
            }
            recordio.append_record(self.feedback_log, "feedback", record)
            return weights

    def _apply_feedback(
        self, fb: FeedbackRecord, rule_ids: list[str], log: bool
    ) -> dict[str, float]:
        if fb.verdict not in ("confirm", "reject"):
            raise InvalidFeedback(f"verdict must be confirm or reject, got {fb.verdict!r}")
        key = (fb.doc_id, fb.finding_id, fb.reviewer)
        if key in self._verdict_keys:
            raise DuplicateVerdict(
                f"reviewer {fb.reviewer!r} already judged finding {fb.finding_id!r}"
            )
        last = self._reviewer_last_ts.get(fb.reviewer)
        if last is not None and fb.timestamp and fb.timestamp < last:
            raise InvalidFeedback(
                f"timestamp {fb.timestamp} precedes reviewer's last verdict at {last}"
            )
        self._verdict_keys.add(key)
        if fb.timestamp:
            self._reviewer_last_ts[fb.reviewer] = fb.timestamp
        weights = {}
        for rule_id in rule_ids:
            counts = self.feedback_counts.setdefault(rule_id, [0, 0])
            counts[0 if fb.verdict == "confirm" else 1] += 1
            weights[rule_id] = feedback_weight(counts[0], counts[1])
            self._audit(
                "reweight_rule",
                log,
                rule_id=rule_id,
                feedback_id=fb.feedback_id,
                weight=weights[rule_id],
            )
        return weights

    def current_weights(self) -> dict[str, float]:
        return {
            rid: feedback_weight(c, r) for rid, (c, r) in sorted(self.feedback_counts.items())
        }

    # --- clauses and guidelines ---------------------------------------------

    def add_clause(self, clause: LabeledClause) -> bool:
        """Add one labeled clause; returns False for a duplicate text."""
        with self._lock:
            key = normalize_clause(clause.text)
            if key in self._clause_keys:
                return False
            self._clause_keys.add(key)
            self.clauses.append(clause)
            recordio.append_record(self.clauses_file, "clauses", clause_to_json(clause))
            return True

    def import_corpus(
        self,
        path: str | Path,
        mapping: dict[str, str] | str | Path,
        strict: bool = True,
    ) -> ImportResult:
        """Import an interchange clause corpus under a category mapping."""
        if not isinstance(mapping, dict):
            data = json.loads(Path(mapping).read_text(encoding="utf-8"))
            mapping = dict(data.get("categories", {}))
        records = recordio.read_records(path, "clauses")
        added = dup = unmapped = 0
        for rec in records:
            category = rec.get("category", "")
            if category not in mapping:
                if strict:
                    raise UnmappedCategory(f"no mapping for category {category!r}")
                unmapped += 1
                continue
            clause = LabeledClause(
                text=rec["text"],
                label=mapping[category],
                language=rec.get("language", "en"),
                source="import",
            )
            if self.add_clause(clause):
                added += 1
            else:
                dup += 1
        return ImportResult(added=added, skipped_duplicates=dup, skipped_unmapped=unmapped)

    def add_guideline(self, guideline: AnnotationGuideline) -> None:
        with self._lock:
            last = self.guidelines[-1].version if self.guidelines else 0
            if guideline.version <= last:
                raise InvalidGuideline(
                    f"version {guideline.version} not greater than {last}"
                )
            self.guidelines.append(guideline)
            recordio.append_record(
                self.guidelines_file,
                "guidelines",
                {"version": guideline.version, "criteria": list(guideline.criteria)},
            )

    # --- rule table -----------------------------------------------------------

    def rule_table(self) -> list[Rule]:
        """Decision-derived rules with feedback weights applied, by rule id."""
        weights = self.current_weights()
        out = []
        for rule_id in sorted(self.rules):
            rule = self.rules[rule_id]
            if rule_id in weights:
                rule = replace(rule, weight=weights[rule_id])
            out.append(rule)
        return out

    def export_rules_snapshot(self) -> str:
        """Canonical serialization of the rule table, for audit diffing."""
        lines = [
            recordio.dump_record(
                {"format": "policylint/rules", "version": recordio.FORMAT_VERSION}
            )
        ]
        lines.extend(recordio.dump_record(rule_to_json(r)) for r in self.rule_table())
        return "\n".join(lines) + "\n"

    # --- reports ----------------------------------------------------------------

    def save_report(self, doc_id: str, machine_bytes: bytes) -> None:
        self._report_path(doc_id).write_bytes(machine_bytes)

    def load_report_bytes(self, doc_id: str) -> bytes | None:
        path = self._report_path(doc_id)
        return path.read_bytes() if path.exists() else None

    def load_report_json(self, doc_id: str) -> dict | None:
        raw = self.load_report_bytes(doc_id)
        return json.loads(raw) if raw is not None else None

    def list_report_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "reports").glob("*.json"))

    def find_finding(self, doc_id: str, finding_id: str) -> dict | None:
        report = self.load_report_json(doc_id)
        if report is None:
            return None
        for finding in report.get("findings", ()):
            if finding.get("finding_id") == finding_id:
                return finding
        return None


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()
