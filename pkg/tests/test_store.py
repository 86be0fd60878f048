from __future__ import annotations

import json
import shutil
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policylint.classifier import LabeledClause
from policylint.recordio import write_records
from policylint.rules import ComplianceLabel
from policylint.store import (
    AnnotationGuideline,
    ConflictUnresolvable,
    DecisionRecord,
    DuplicateVerdict,
    FeedbackRecord,
    InvalidGuideline,
    KnowledgeStore,
    UnknownFinding,
    UnknownTargetDecision,
    UnmappedCategory,
    feedback_weight,
)

CLAUSE = "We reserve the right to sell your personal data to third parties without informing you"


def make_decision(decision_id, disposition, *, level=1, when=date(2019, 3, 1),
                  target=CLAUSE, jurisdiction="FR", authority="CNIL"):
    return DecisionRecord(
        decision_id=decision_id,
        authority=authority,
        authority_level=level,
        jurisdiction=jurisdiction,
        date=when,
        disposition=disposition,
        target=target,
    )


@pytest.fixture
def store(tmp_path):
    return KnowledgeStore(tmp_path / "store")


# -- decisions -------------------------------------------------------------------


def test_annulment_creates_unlawful_rule(store):
    affected = store.record_decision(make_decision("d1", "annuls_clause"))
    assert affected == ["dec-d1"]
    rule = store.rules["dec-d1"]
    assert rule.label == ComplianceLabel.UNLAWFUL
    assert rule.kind == "clause_similarity"
    assert rule.jurisdiction == "FR"
    assert rule.effective_from == date(2019, 3, 1)
    assert rule.effective_until is None


def test_second_annulment_extends_grounds(store):
    store.record_decision(make_decision("d1", "annuls_clause"))
    affected = store.record_decision(
        make_decision("d2", "annuls_clause", level=2, when=date(2020, 1, 10))
    )
    assert affected == ["dec-d1"]
    grounds = {g.decision_id for g in store.rules["dec-d1"].grounds}
    assert grounds == {"d1", "d2"}


def test_appeal_validation_closes_dpa_rule(store):
    store.record_decision(make_decision("d1", "annuls_clause", level=1))
    affected = store.record_decision(
        make_decision("d2", "validates_clause", level=3, when=date(2020, 6, 15))
    )
    assert affected == ["dec-d1"]
    assert store.rules["dec-d1"].effective_until == date(2020, 6, 15)


def test_low_level_validation_logs_conflict_without_change(store):
    store.record_decision(make_decision("d1", "annuls_clause", level=4))
    affected = store.record_decision(
        make_decision("d2", "validates_clause", level=1, when=date(2020, 6, 15))
    )
    assert affected == []
    assert store.rules["dec-d1"].effective_until is None
    audit = store.audit_log.read_text(encoding="utf-8")
    assert "conflict" in audit


def test_same_level_same_date_is_unresolvable(store):
    store.record_decision(make_decision("d1", "annuls_clause", level=2, when=date(2019, 5, 1)))
    with pytest.raises(ConflictUnresolvable):
        store.record_decision(
            make_decision("d2", "validates_clause", level=2, when=date(2019, 5, 1))
        )
    # nothing was applied or logged for the conflicting decision
    assert "d2" not in store.decisions
    assert store.rules["dec-d1"].effective_until is None


def test_overruling_closes_solely_grounded_rules(store):
    store.record_decision(make_decision("d1", "annuls_clause"))
    affected = store.record_decision(
        make_decision("d3", "overrules_decision", level=4, when=date(2021, 2, 2), target="d1")
    )
    assert affected == ["dec-d1"]
    assert store.rules["dec-d1"].effective_until == date(2021, 2, 2)


def test_overruling_unknown_target(store):
    with pytest.raises(UnknownTargetDecision):
        store.record_decision(
            make_decision("d9", "overrules_decision", target="ghost", when=date(2021, 2, 2))
        )


def test_overruling_spares_multi_ground_rules(store):
    store.record_decision(make_decision("d1", "annuls_clause"))
    store.record_decision(make_decision("d2", "annuls_clause", level=2, when=date(2020, 1, 1)))
    affected = store.record_decision(
        make_decision("d3", "overrules_decision", level=4, when=date(2021, 1, 1), target="d1")
    )
    assert affected == []
    assert store.rules["dec-d1"].effective_until is None


def test_validation_respects_jurisdiction(store):
    store.record_decision(make_decision("d1", "annuls_clause", jurisdiction="FR"))
    affected = store.record_decision(
        make_decision(
            "d2", "validates_clause", level=4, when=date(2020, 1, 1), jurisdiction="DE"
        )
    )
    assert affected == []


# -- inconsistencies -----------------------------------------------------------


def test_empty_store_has_no_inconsistencies(store):
    assert store.detect_inconsistencies() == []


def test_same_level_same_date_pair_flagged(store):
    store.record_decision(make_decision("a1", "annuls_clause", level=2, when=date(2019, 1, 1)))
    store.record_decision(
        make_decision("v1", "validates_clause", level=2, when=date(2019, 1, 1),
                      target=CLAUSE + " thanks", jurisdiction="DE")
    )
    found = store.detect_inconsistencies()
    assert len(found) == 1
    assert found[0][:2] == ("a1", "v1")


def test_dominated_pair_not_flagged(store):
    store.record_decision(make_decision("a1", "annuls_clause", level=1, when=date(2019, 1, 1)))
    store.record_decision(
        make_decision("v1", "validates_clause", level=4, when=date(2018, 6, 1),
                      jurisdiction="DE")
    )
    assert store.detect_inconsistencies() == []


# -- feedback --------------------------------------------------------------------


def put_report(store, doc_id="doc-1", finding_id="doc-1:sentence:0", rules=("r1",)):
    report = {
        "format": "policylint/report",
        "version": 1,
        "doc_id": doc_id,
        "findings": [
            {
                "finding_id": finding_id,
                "matched_rules": [{"rule_id": r, "span": [0, 5], "similarity": 1.0} for r in rules],
            }
        ],
    }
    store.save_report(doc_id, json.dumps(report).encode("utf-8"))


def make_feedback(store, reviewer="rev-a", verdict="confirm", finding="doc-1:sentence:0",
                  ts="2026-01-01T10:00:00+00:00"):
    return FeedbackRecord(
        feedback_id=store.new_feedback_id(),
        doc_id=finding.split(":", 1)[0],
        finding_id=finding,
        reviewer=reviewer,
        verdict=verdict,
        timestamp=ts,
    )


def test_first_confirm_weight(store):
    put_report(store)
    weights = store.record_feedback(make_feedback(store))
    assert weights == {"r1": pytest.approx(2 / 3)}


def test_three_confirms_one_reject(store):
    put_report(store)
    for i, (reviewer, verdict) in enumerate(
        [("a", "confirm"), ("b", "confirm"), ("c", "confirm"), ("d", "reject")]
    ):
        weights = store.record_feedback(
            make_feedback(store, reviewer=reviewer, verdict=verdict,
                          ts=f"2026-01-01T10:0{i}:00+00:00")
        )
    assert weights == {"r1": pytest.approx(4 / 6)}


def test_duplicate_verdict_rejected(store):
    put_report(store)
    store.record_feedback(make_feedback(store))
    with pytest.raises(DuplicateVerdict):
        store.record_feedback(make_feedback(store, ts="2026-01-01T11:00:00+00:00"))


def test_unknown_finding(store):
    with pytest.raises(UnknownFinding):
        store.record_feedback(make_feedback(store, finding="doc-9:sentence:0"))


def test_feedback_on_classifier_finding_updates_nothing(store):
    put_report(store, rules=())
    assert store.record_feedback(make_feedback(store)) == {}


def test_reviewer_timestamps_must_be_monotone(store):
    put_report(store)
    put_report(store, doc_id="doc-2", finding_id="doc-2:sentence:0")
    store.record_feedback(make_feedback(store, ts="2026-01-02T00:00:00+00:00"))
    from policylint.store import InvalidFeedback

    with pytest.raises(InvalidFeedback):
        store.record_feedback(
            make_feedback(store, finding="doc-2:sentence:0", ts="2026-01-01T00:00:00+00:00")
        )


@given(st.lists(st.booleans(), min_size=1, max_size=60))
@settings(max_examples=1000, deadline=None)
def test_weight_always_strictly_between_zero_and_one(verdicts):
    confirms = sum(verdicts)
    rejects = len(verdicts) - confirms
    w = feedback_weight(confirms, rejects)
    assert 0.0 < w < 1.0


def test_weight_is_order_independent():
    # multiset of verdicts fully determines the weight
    assert feedback_weight(3, 1) == feedback_weight(3, 1)
    assert feedback_weight(2, 2) == pytest.approx(0.5)


# -- corpus import ----------------------------------------------------------------


def write_corpus(path, rows):
    write_records(path, "clauses", rows)


def test_import_dedup(tmp_path, store):
    corpus = tmp_path / "corpus.jsonl"
    rows = [
        {"text": f"clause number {i}", "category": "vague", "language": "en"}
        for i in range(8)
    ]
    rows.append({"text": "clause number 0", "category": "vague", "language": "en"})
    rows.append({"text": "Clause NUMBER 0", "category": "vague", "language": "en"})
    write_corpus(corpus, rows)
    result = store.import_corpus(corpus, {"vague": "problematic"})
    assert result.added == 8
    assert result.skipped_duplicates == 2


def test_import_unknown_category_strict(tmp_path, store):
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(corpus, [{"text": "something", "category": "mystery"}])
    with pytest.raises(UnmappedCategory):
        store.import_corpus(corpus, {"vague": "problematic"})


def test_import_lenient_skips(tmp_path, store):
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(
        corpus,
        [
            {"text": "something", "category": "mystery"},
            {"text": "kept clause", "category": "vague"},
        ],
    )
    result = store.import_corpus(corpus, {"vague": "problematic"}, strict=False)
    assert result.added == 1
    assert result.skipped_unmapped == 1


def test_reimport_adds_nothing(tmp_path, store):
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(corpus, [{"text": "one clause here", "category": "vague"}])
    assert store.import_corpus(corpus, {"vague": "problematic"}).added == 1
    assert store.import_corpus(corpus, {"vague": "problematic"}).added == 0


def test_imported_clauses_survive_reopen(tmp_path, store):
    store.add_clause(LabeledClause("we keep everything", "problematic"))
    reopened = KnowledgeStore(store.root)
    assert [c.text for c in reopened.clauses] == ["we keep everything"]


# -- guidelines ------------------------------------------------------------------


def test_guideline_versions_increase(store):
    store.add_guideline(AnnotationGuideline(1, ("vague wording incompatible with 12(1)",)))
    with pytest.raises(InvalidGuideline):
        store.add_guideline(AnnotationGuideline(1, ("anything",)))
    store.add_guideline(AnnotationGuideline(2, ("extended criteria",)))
    assert [g.version for g in store.guidelines] == [1, 2]


# -- replay ------------------------------------------------------------------------


def test_replay_reproduces_rule_table_byte_identically(tmp_path, store):
    put_report(store, rules=("dec-d1",))
    store.record_decision(make_decision("d1", "annuls_clause"))
    store.record_decision(
        make_decision("d2", "annuls_clause", when=date(2019, 8, 1),
                      target="Your data may be transferred to anyone we choose at any time")
    )
    store.record_feedback(make_feedback(store))
    store.record_decision(
        make_decision("d3", "validates_clause", level=3, when=date(2020, 6, 15))
    )
    snapshot = store.export_rules_snapshot()

    replay_dir = tmp_path / "replay"
    replay_dir.mkdir()
    for name in ("decisions.log", "feedback.log"):
        src = store.root / name
        if src.exists():
            shutil.copy(src, replay_dir / name)
    replayed = KnowledgeStore(replay_dir)
    assert replayed.export_rules_snapshot() == snapshot


def test_reopen_is_equivalent_to_replay(store):
    store.record_decision(make_decision("d1", "annuls_clause"))
    snapshot = store.export_rules_snapshot()
    reopened = KnowledgeStore(store.root)
    assert reopened.export_rules_snapshot() == snapshot


def test_old_scans_unaffected_by_new_decisions(store):
    from policylint.document import ingest_text
    from policylint.rules import compile_rules, scan

    store.record_decision(make_decision("d1", "annuls_clause"))
    doc = ingest_text(CLAUSE + ".", "en", "FR")
    old_as_of = date(2019, 6, 1)
    ruleset = compile_rules(store.rule_table())
    before = scan(doc, ruleset, old_as_of)
    assert len(before) == 1
    # a later validation closes the rule, but the pinned as_of still matches
    store.record_decision(
        make_decision("d2", "validates_clause", level=3, when=date(2020, 6, 15))
    )
    after = scan(doc, compile_rules(store.rule_table()), old_as_of)
    assert after == before
    assert scan(doc, compile_rules(store.rule_table()), date(2021, 1, 1)) == []
