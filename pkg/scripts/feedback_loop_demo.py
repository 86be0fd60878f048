#!/usr/bin/env python3
"""Walk the decision/feedback loop against a throwaway store.

Shows how an annulment creates an unlawful rule, how reviewer verdicts
recalibrate its weight, and how an appeal validation closes its validity
without changing historical scans.

    python3 scripts/feedback_loop_demo.py
"""

from __future__ import annotations

import json
import tempfile
from datetime import date

from policylint.document import ingest_text
from policylint.rules import compile_rules, scan
from policylint.store import DecisionRecord, FeedbackRecord, KnowledgeStore

CLAUSE = "We reserve the right to sell your personal data to third parties"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        store = KnowledgeStore(tmp)

        affected = store.record_decision(
            DecisionRecord(
                decision_id="cnil-2019-0042", authority="CNIL", authority_level=1,
                jurisdiction="FR", date=date(2019, 3, 1),
                disposition="annuls_clause", target=CLAUSE,
            )
        )
        print(f"annulment created: {affected}")

        doc = ingest_text(CLAUSE + ".", "en", "FR")
        findings = scan(doc, compile_rules(store.rule_table()), date(2019, 6, 1))
        print(f"scan as of 2019-06-01: {len(findings)} finding(s)")

        report = {
            "format": "policylint/report", "version": 1, "doc_id": doc.doc_id,
            "findings": [{
                "finding_id": findings[0].finding_id,
                "matched_rules": [
                    {"rule_id": m.rule_id, "span": list(m.span), "similarity": m.similarity}
                    for m in findings[0].matched_rules
                ],
            }],
        }
        store.save_report(doc.doc_id, json.dumps(report).encode())
        for reviewer, verdict in (("alice", "confirm"), ("bob", "confirm"), ("carol", "reject")):
            weights = store.record_feedback(
                FeedbackRecord(
                    feedback_id=store.new_feedback_id(), doc_id=doc.doc_id,
                    finding_id=findings[0].finding_id, reviewer=reviewer, verdict=verdict,
                    timestamp=f"2026-01-01T00:00:00+00:00",
                )
            )
            print(f"{reviewer} {verdict}s -> weights {weights}")

        store.record_decision(
            DecisionRecord(
                decision_id="ca-paris-2020-17", authority="CA Paris", authority_level=3,
                jurisdiction="FR", date=date(2020, 6, 15),
                disposition="validates_clause", target=CLAUSE,
            )
        )
        ruleset = compile_rules(store.rule_table())
        old = scan(doc, ruleset, date(2019, 6, 1))
        new = scan(doc, ruleset, date(2021, 1, 1))
        print(f"after appeal validation: 2019 scan still {len(old)}, 2021 scan {len(new)}")


if __name__ == "__main__":
    main()
