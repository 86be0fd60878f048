from __future__ import annotations

import pytest

from policylint.completeness import (
    InvalidChecklist,
    detect_items,
    load_checklist,
    missing_report,
)
from policylint.document import ingest_text
from policylint.pipeline import DEFAULT_CHECKLIST, data_path


@pytest.fixture(scope="module")
def checklist():
    return load_checklist(data_path(DEFAULT_CHECKLIST), "FR")


def test_default_checklist_loads(checklist):
    assert len(checklist.items) == 15
    rights = [it for it in checklist.items if it.article in
              ("15", "16", "17", "18", "19", "20", "21", "22", "7(3)", "13(2)(d)", "14(2)(f)")]
    assert len(rights) == 11


def test_jurisdiction_override_applied(checklist):
    complaint = checklist.item("complaint")
    assert any("cnil" in d for d in complaint.detectors)


def test_empty_checklist_rejected(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text('{"format": "policylint/checklist", "version": 1}\n', encoding="utf-8")
    with pytest.raises(InvalidChecklist):
        load_checklist(p, "FR")


def test_item_without_detectors_rejected(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text(
        '{"format": "policylint/checklist", "version": 1}\n'
        '{"item_id": "x", "title": "x", "article": "15", "detectors": []}\n',
        encoding="utf-8",
    )
    with pytest.raises(InvalidChecklist):
        load_checklist(p, "FR")


def test_duplicate_item_rejected(tmp_path):
    p = tmp_path / "dup.jsonl"
    p.write_text(
        '{"format": "policylint/checklist", "version": 1}\n'
        '{"item_id": "x", "title": "x", "article": "15", "detectors": ["a b"]}\n'
        '{"item_id": "x", "title": "x", "article": "16", "detectors": ["c d"]}\n',
        encoding="utf-8",
    )
    with pytest.raises(InvalidChecklist):
        load_checklist(p, "FR")


def test_complete_policy_has_no_missing(checklist, complete_policy_text):
    doc = ingest_text(complete_policy_text, "en", "FR")
    statuses = detect_items(doc, checklist)
    assert [st.item_id for st in statuses] == sorted(st.item_id for st in statuses)
    assert all(st.status == "present" for st in statuses)
    for st in statuses:
        assert st.evidence  # present iff evidence non-empty


def test_complaint_sentence_detected(checklist):
    doc = ingest_text(
        "You may lodge a complaint with a supervisory authority.", "en", "FR"
    )
    statuses = {st.item_id: st for st in detect_items(doc, checklist)}
    assert statuses["complaint"].status == "present"


def test_removing_access_sentence_flips_exactly_one(checklist, complete_policy_text):
    paragraphs = complete_policy_text.strip().split("\n\n")
    kept = [p for p in paragraphs if "right of access" not in p]
    assert len(kept) == len(paragraphs) - 1
    doc = ingest_text("\n\n".join(kept), "en", "FR")
    statuses = detect_items(doc, checklist)
    missing = missing_report(statuses, checklist)
    assert missing == [("access", "15")]


def test_missing_report_empty_when_all_present(checklist, complete_policy_text):
    doc = ingest_text(complete_policy_text, "en", "FR")
    assert missing_report(detect_items(doc, checklist), checklist) == []


def test_evidence_recheckable(checklist, complete_policy_text):
    doc = ingest_text(complete_policy_text, "en", "FR")
    from policylint.textnorm import contains_token_seq, fold_tokens

    for st in detect_items(doc, checklist):
        item = checklist.item(st.item_id)
        for seg_id in st.evidence:
            tokens = fold_tokens(doc.segment(seg_id).text)
            assert any(
                contains_token_seq(tokens, tuple(fold_tokens(d)))
                for d in item.detectors
            )


def test_adding_text_is_monotone(checklist, complete_policy_text):
    partial = "\n\n".join(complete_policy_text.strip().split("\n\n")[:5])
    doc_small = ingest_text(partial, "en", "FR")
    doc_big = ingest_text(partial + "\n\nYou have the right to object.", "en", "FR")
    present_small = {
        st.item_id for st in detect_items(doc_small, checklist) if st.status == "present"
    }
    present_big = {
        st.item_id for st in detect_items(doc_big, checklist) if st.status == "present"
    }
    assert present_small <= present_big


def test_concatenation_unions_presence(checklist, complete_policy_text):
    paragraphs = complete_policy_text.strip().split("\n\n")
    part_a = "\n\n".join(paragraphs[:7])
    part_b = "\n\n".join(paragraphs[7:])
    present = lambda text: {
        st.item_id
        for st in detect_items(ingest_text(text, "en", "FR"), checklist)
        if st.status == "present"
    }
    assert present(part_a) | present(part_b) == present(part_a + "\n\n" + part_b)
