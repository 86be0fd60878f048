#!/usr/bin/env python3
"""Regenerate the frontend test fixtures from the review service itself.

Runs the real HTTP app in-process against a throwaway store, uploads the
five-finding fixture policy, and freezes the exact /reports/{id} and
/documents/{id}/findings responses the UI consumes.

    python3 scripts/make_ui_fixture.py
"""

from __future__ import annotations

import json
import tempfile
from datetime import date
from pathlib import Path

from fastapi.testclient import TestClient

from policylint.service import ServiceConfig, create_app

ROOT = Path(__file__).resolve().parent.parent
POLICY = ROOT / "tests" / "fixtures" / "policy_rules.txt"
RULES = ROOT / "tests" / "fixtures" / "rules_fixture.jsonl"
OUT_DIR = ROOT / "frontend" / "tests" / "fixtures"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        app = create_app(
            Path(tmp) / "store",
            ServiceConfig(
                rules_path=str(RULES),
                jurisdiction="FR",
                as_of=date(2026, 1, 15),
                tokens={"fixture-token": "fixture-reviewer"},
            ),
        )
        client = TestClient(app)
        auth = {"Authorization": "Bearer fixture-token"}
        doc_id = client.post(
            "/documents",
            json={"text": POLICY.read_text(encoding="utf-8")},
            headers=auth,
        ).json()["doc_id"]
        report = client.get(f"/reports/{doc_id}", headers=auth)
        findings = client.get(f"/documents/{doc_id}/findings", headers=auth)
    (OUT_DIR / "report.json").write_bytes(report.content)
    (OUT_DIR / "findings.json").write_text(
        json.dumps(findings.json(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {OUT_DIR / 'report.json'}")
    print(f"wrote {OUT_DIR / 'findings.json'}")


if __name__ == "__main__":
    main()
