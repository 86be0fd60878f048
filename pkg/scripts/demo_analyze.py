#!/usr/bin/env python3
"""End-to-end demo: analyze a small sample policy with the shipped defaults.

Prints the plain-text report and writes the HTML report next to this script
(demo_report.html). Run from the repository root:

    python3 scripts/demo_analyze.py
"""

from __future__ import annotations

from datetime import date
from pathlib import Path

from policylint.pipeline import AnalysisConfig, Pipeline
from policylint.reporting import render

SAMPLE = """\
Privacy Notice

Example Corp is the data controller for this service. We use your data to
run the app and we explain the purposes of the processing below.

We keep server backups indefinitely and may change this notice at our sole
discretion.

You have the right of access to your personal data and the right to
rectification of inaccurate data. You may lodge a complaint with a
supervisory authority.
"""


def main() -> None:
    pipeline = Pipeline.build(AnalysisConfig(jurisdiction="FR", as_of=date(2026, 1, 15)))
    _, report = pipeline.analyze(SAMPLE)
    print(render(report, "plain"))
    out = Path(__file__).parent / "demo_report.html"
    out.write_text(render(report, "html"), encoding="utf-8")
    print(f"HTML report written to {out}")


if __name__ == "__main__":
    main()
