"""Compliance reports: aggregation, composite scoring, ranking, rendering.

The machine format is the canonical serialization: stable field order, no
timestamps beyond the explicit as_of, floats emitted via json's shortest
round-trip repr. Reports embed the analyzed document (text plus segment
spans) so HTML rendering and the review service need nothing else.
"""

from __future__ import annotations

import html as html_mod
import json
from dataclasses import dataclass
from datetime import date

from .completeness import Checklist, ChecklistStatus
from .document import PolicyDocument, resolve_segment
from .errors import PolicyLintError
from .readability import ReadabilityScore, document_score
from .rules import ComplianceLabel, Finding, LegalBasis, MixedDocuments, RuleMatch

REPORT_KIND = "policylint/report"
REPORT_VERSION = 1


class EmptyCohort(PolicyLintError):
    pass


class BadReport(PolicyLintError):
    pass


@dataclass(frozen=True)
class CompositeWeights:
    unlawful: float = 10.0
    problematic: float = 4.0
    missing: float = 6.0
    readability_floor: float = 60.0
    readability_divisor: float = 3.0


@dataclass(frozen=True)
class SegmentInfo:
    span: tuple[int, int]
    parent_index: int | None = None
    is_heading: bool = False
    is_list_intro: bool = False
    is_list_item: bool = False


@dataclass(frozen=True)
class ReportDocument:
    language: str
    source_kind: str
    raw_text: str
    paragraphs: tuple[SegmentInfo, ...]
    sentences: tuple[SegmentInfo, ...]


@dataclass(frozen=True)
class ReportFinding:
    finding_id: str
    segment_id: str
    granularity: str
    segment_index: int
    span: tuple[int, int]
    text: str
    label: ComplianceLabel
    grounds: tuple[LegalBasis, ...]
    matched_rules: tuple[RuleMatch, ...]
    confidence: float
    context_used: bool


@dataclass(frozen=True)
class ChecklistEntry:
    item_id: str
    title: str
    article: str
    status: str
    evidence: tuple[str, ...]


@dataclass(frozen=True)
class Counts:
    problematic: int
    unlawful: int
    missing: int


@dataclass(frozen=True)
class ComplianceReport:
    doc_id: str
    as_of: date
    jurisdiction: str
    findings: tuple[ReportFinding, ...]
    checklist: tuple[ChecklistEntry, ...]
    readability: tuple[ReadabilityScore, ...]
    counts: Counts
    composite: float
    document: ReportDocument
    percentile: float | None = None


def build_report(
    doc: PolicyDocument,
    findings: list[Finding],
    statuses: list[ChecklistStatus],
    scores: list[ReadabilityScore],
    as_of: date,
    *,
    checklist: Checklist,
    weights: CompositeWeights = CompositeWeights(),
    percentile: float | None = None,
) -> ComplianceReport:
    """Assemble the report and compute the composite score.

    composite = 100 - w_u*unlawful - w_p*problematic - w_m*missing
                - max(0, floor - document adjusted FRE) / divisor,
    floored at 0. All weights are configuration with declared defaults.
    """
    for f in findings:
        if f.doc_id != doc.doc_id:
            raise MixedDocuments(f"finding {f.finding_id} is not from {doc.doc_id}")
    report_findings = []
    for f in sorted(findings, key=lambda f: (f.segment_index, f.label)):
        seg = resolve_segment(doc, f.segment_id)
        report_findings.append(
            ReportFinding(
                finding_id=f.finding_id,
                segment_id=f.segment_id,
                granularity=f.granularity,
                segment_index=f.segment_index,
                span=seg.span,
                text=seg.text,
                label=f.label,
                grounds=f.grounds,
                matched_rules=f.matched_rules,
                confidence=float(f.confidence),
                context_used=f.context_used,
            )
        )
    entries = []
    for st in statuses:
        for seg_id in st.evidence:
            resolve_segment(doc, seg_id)  # raises on foreign evidence
        item = checklist.item(st.item_id)
        entries.append(
            ChecklistEntry(
                item_id=st.item_id,
                title=item.title,
                article=item.article,
                status=st.status,
                evidence=st.evidence,
            )
        )
    entries.sort(key=lambda e: e.item_id)
    counts = Counts(
        problematic=sum(1 for f in report_findings if f.label == ComplianceLabel.PROBLEMATIC),
        unlawful=sum(1 for f in report_findings if f.label == ComplianceLabel.UNLAWFUL),
        missing=sum(1 for e in entries if e.status == "missing"),
    )
    doc_adjusted = document_score(scores).adjusted_fre
    raw = (
        100.0
        - weights.unlawful * counts.unlawful
        - weights.problematic * counts.problematic
        - weights.missing * counts.missing
        - max(0.0, weights.readability_floor - doc_adjusted) / weights.readability_divisor
    )
    return ComplianceReport(
        doc_id=doc.doc_id,
        as_of=as_of,
        jurisdiction=doc.jurisdiction,
        findings=tuple(report_findings),
        checklist=tuple(entries),
        readability=tuple(scores),
        counts=counts,
        composite=max(0.0, raw),
        document=ReportDocument(
            language=doc.language,
            source_kind=doc.source_kind,
            raw_text=doc.raw_text,
            paragraphs=tuple(_segment_info(s) for s in doc.paragraphs),
            sentences=tuple(_segment_info(s) for s in doc.sentences),
        ),
        percentile=percentile,
    )


def _segment_info(seg) -> SegmentInfo:
    return SegmentInfo(
        span=seg.span,
        parent_index=seg.parent_index,
        is_heading=seg.is_heading,
        is_list_intro=seg.is_list_intro,
        is_list_item=seg.is_list_item,
    )


def rank(report: ComplianceReport, stored_reports: list[ComplianceReport]) -> float:
    """Percentile of the report's composite against a cohort; ties count
    against the report (strict inequality only)."""
    if not stored_reports:
        raise EmptyCohort("no stored reports to rank against")
    below = sum(1 for r in stored_reports if r.composite < report.composite)
    return 100.0 * below / len(stored_reports)


# --- serialization ---------------------------------------------------------


def _payload(report: ComplianceReport) -> dict:
    return {
        "format": REPORT_KIND,
        "version": REPORT_VERSION,
        "doc_id": report.doc_id,
        "as_of": report.as_of.isoformat(),
        "jurisdiction": report.jurisdiction,
        "counts": {
            "problematic": report.counts.problematic,
            "unlawful": report.counts.unlawful,
            "missing": report.counts.missing,
        },
        "composite": float(report.composite),
        "percentile": report.percentile,
        "findings": [
            {
                "finding_id": f.finding_id,
                "segment_id": f.segment_id,
                "granularity": f.granularity,
                "segment_index": f.segment_index,
                "span": list(f.span),
                "text": f.text,
                "label": f.label.wire,
                "grounds": [g.to_json() for g in f.grounds],
                "matched_rules": [
                    {"rule_id": m.rule_id, "span": list(m.span), "similarity": float(m.similarity)}
                    for m in f.matched_rules
                ],
                "confidence": float(f.confidence),
                "context_used": f.context_used,
            }
            for f in report.findings
        ],
        "checklist": [
            {
                "item_id": e.item_id,
                "title": e.title,
                "article": e.article,
                "status": e.status,
                "evidence": list(e.evidence),
            }
            for e in report.checklist
        ],
        "readability": [
            {
                "unit": s.unit,
                "index": s.index,
                "fre": float(s.fre),
                "fkgl": float(s.fkgl),
                "adjusted_fre": float(s.adjusted_fre),
            }
            for s in report.readability
        ],
        "document": {
            "language": report.document.language,
            "source_kind": report.document.source_kind,
            "raw_text": report.document.raw_text,
            "paragraphs": [_seg_info_json(s) for s in report.document.paragraphs],
            "sentences": [_seg_info_json(s) for s in report.document.sentences],
        },
    }


def _seg_info_json(info: SegmentInfo) -> dict:
    return {
        "span": list(info.span),
        "parent_index": info.parent_index,
        "is_heading": info.is_heading,
        "is_list_intro": info.is_list_intro,
        "is_list_item": info.is_list_item,
    }


def render_machine(report: ComplianceReport) -> str:
    return json.dumps(_payload(report), ensure_ascii=False, indent=2) + "\n"


def parse_report(data: str | bytes) -> ComplianceReport:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise BadReport(f"not valid JSON: {exc}") from exc
    if obj.get("format") != REPORT_KIND or obj.get("version") != REPORT_VERSION:
        raise BadReport(f"not a {REPORT_KIND} v{REPORT_VERSION} document")
    findings = tuple(
        ReportFinding(
            finding_id=f["finding_id"],
            segment_id=f["segment_id"],
            granularity=f["granularity"],
            segment_index=int(f["segment_index"]),
            span=tuple(f["span"]),
            text=f["text"],
            label=ComplianceLabel.parse(f["label"]),
            grounds=tuple(LegalBasis.from_json(g) for g in f["grounds"]),
            matched_rules=tuple(
                RuleMatch(m["rule_id"], tuple(m["span"]), float(m["similarity"]))
                for m in f["matched_rules"]
            ),
            confidence=float(f["confidence"]),
            context_used=bool(f["context_used"]),
        )
        for f in obj["findings"]
    )
    checklist = tuple(
        ChecklistEntry(
            item_id=e["item_id"],
            title=e["title"],
            article=e["article"],
            status=e["status"],
            evidence=tuple(e["evidence"]),
        )
        for e in obj["checklist"]
    )
    readability = tuple(
        ReadabilityScore(
            fre=float(s["fre"]),
            fkgl=float(s["fkgl"]),
            adjusted_fre=float(s["adjusted_fre"]),
            unit=s["unit"],
            index=s["index"],
        )
        for s in obj["readability"]
    )
    docobj = obj["document"]
    document = ReportDocument(
        language=docobj["language"],
        source_kind=docobj["source_kind"],
        raw_text=docobj["raw_text"],
        paragraphs=tuple(_seg_info_parse(s) for s in docobj["paragraphs"]),
        sentences=tuple(_seg_info_parse(s) for s in docobj["sentences"]),
    )
    counts = obj["counts"]
    return ComplianceReport(
        doc_id=obj["doc_id"],
        as_of=date.fromisoformat(obj["as_of"]),
        jurisdiction=obj["jurisdiction"],
        findings=findings,
        checklist=checklist,
        readability=readability,
        counts=Counts(
            problematic=int(counts["problematic"]),
            unlawful=int(counts["unlawful"]),
            missing=int(counts["missing"]),
        ),
        composite=float(obj["composite"]),
        document=document,
        percentile=obj.get("percentile"),
    )


def _seg_info_parse(obj: dict) -> SegmentInfo:
    return SegmentInfo(
        span=tuple(obj["span"]),
        parent_index=obj["parent_index"],
        is_heading=obj["is_heading"],
        is_list_intro=obj["is_list_intro"],
        is_list_item=obj["is_list_item"],
    )


# --- rendering ---------------------------------------------------------------


def render(report: ComplianceReport, format: str = "machine") -> str:
    if format == "machine":
        return render_machine(report)
    if format == "html":
        return render_html(report)
    if format == "plain":
        return render_plain(report)
    raise ValueError(f"unknown report format {format!r}")


def _ground_label(g: LegalBasis) -> str:
    if g.kind == "gdpr_article":
        return f"art. {g.article}"
    return f"decision {g.decision_id}"


_HTML_STYLE = """
body { font-family: Georgia, serif; margin: 2rem auto; max-width: 52rem; color: #222; }
mark.problematic { background: #ffe08a; }
mark.unlawful { background: #ff9f9f; }
mark.compliant_unknown { background: #d8e8ff; }
table { border-collapse: collapse; margin: 1rem 0; }
td, th { border: 1px solid #bbb; padding: 0.25rem 0.6rem; text-align: left; }
tr.missing td { background: #ffecec; }
.meta { color: #555; }
"""


def render_html(report: ComplianceReport) -> str:
    """Static, script-free page: source text with one <mark> per finding
    carrying legal-basis data attributes, plus readability and checklist
    tables."""
    esc = html_mod.escape
    by_para: dict[int, list[ReportFinding]] = {}
    for f in report.findings:
        if f.granularity == "paragraph":
            pidx = f.segment_index
        else:
            pidx = report.document.sentences[f.segment_index].parent_index
        by_para.setdefault(pidx, []).append(f)

    out = [
        "<!doctype html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>Compliance report {esc(report.doc_id)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head>",
        "<body>",
        f"<h1>Compliance report</h1>",
        f'<p class="meta">document {esc(report.doc_id)} &middot; jurisdiction '
        f"{esc(report.jurisdiction)} &middot; as of {report.as_of.isoformat()}</p>",
        f"<p>Composite score: <strong>{report.composite:.1f}</strong> / 100"
        + (
            f" &middot; percentile {report.percentile:.2f}"
            if report.percentile is not None
            else ""
        )
        + f"<br>{report.counts.unlawful} unlawful &middot; {report.counts.problematic} "
        f"problematic &middot; {report.counts.missing} missing</p>",
        "<h2>Document</h2>",
    ]
    text = report.document.raw_text
    for pidx, para in enumerate(report.document.paragraphs):
        p_start, p_end = para.span
        marks = sorted(by_para.get(pidx, ()), key=lambda f: f.span)
        tag = "h3" if para.is_heading else "p"
        parts = [f"<{tag}>"]
        cursor = p_start
        for f in marks:
            s, e = f.span
            s, e = max(s, p_start), min(e, p_end)
            parts.append(esc(text[cursor:s]))
            grounds = "; ".join(_ground_label(g) for g in f.grounds)
            rules = ",".join(m.rule_id for m in f.matched_rules)
            parts.append(
                f'<mark class="{f.label.wire}" data-finding="{esc(f.finding_id)}" '
                f'data-grounds="{esc(grounds)}" data-rules="{esc(rules)}" '
                f'data-confidence="{f.confidence:.3f}">{esc(text[s:e])}</mark>'
            )
            cursor = e
        parts.append(esc(text[cursor:p_end]))
        parts.append(f"</{tag}>")
        out.append("".join(parts))

    out.append("<h2>Mandatory information</h2>")
    out.append("<table><tr><th>item</th><th>article</th><th>status</th></tr>")
    for e in report.checklist:
        cls = ' class="missing"' if e.status == "missing" else ""
        out.append(
            f"<tr{cls}><td>{esc(e.title)}</td><td>{esc(e.article)}</td>"
            f"<td>{e.status}</td></tr>"
        )
    out.append("</table>")

    out.append("<h2>Readability</h2>")
    out.append(
        "<table><tr><th>unit</th><th>FRE</th><th>FKGL</th><th>adjusted FRE</th></tr>"
    )
    for s in report.readability:
        unit = "document" if s.unit == "document" else f"paragraph {s.index}"
        out.append(
            f"<tr><td>{unit}</td><td>{s.fre:.2f}</td><td>{s.fkgl:.2f}</td>"
            f"<td>{s.adjusted_fre:.2f}</td></tr>"
        )
    out.append("</table>")
    out.append("</body>")
    out.append("</html>")
    return "\n".join(out) + "\n"


def render_plain(report: ComplianceReport) -> str:
    lines = [
        f"compliance report for {report.doc_id}",
        f"  as of {report.as_of.isoformat()}  jurisdiction {report.jurisdiction}",
        f"  composite {report.composite:.1f}/100"
        + (
            f"  percentile {report.percentile:.2f}"
            if report.percentile is not None
            else ""
        ),
        f"  findings: {report.counts.unlawful} unlawful, "
        f"{report.counts.problematic} problematic",
    ]
    for f in report.findings:
        grounds = "; ".join(_ground_label(g) for g in f.grounds)
        snippet = f.text.strip().replace("\n", " ")
        if len(snippet) > 70:
            snippet = snippet[:67] + "..."
        lines.append(
            f"    [{f.label.wire}] {f.granularity} {f.segment_index}: "
            f'"{snippet}" ({grounds}; confidence {f.confidence:.2f})'
        )
    missing = [e for e in report.checklist if e.status == "missing"]
    lines.append(f"  missing information: {len(missing)}")
    for e in missing:
        lines.append(f"    - {e.title} (art. {e.article})")
    doc_scores = [s for s in report.readability if s.unit == "document"]
    if doc_scores:
        s = doc_scores[0]
        lines.append(
            f"  readability: fre {s.fre:.2f}, fkgl {s.fkgl:.2f}, "
            f"adjusted {s.adjusted_fre:.2f}"
        )
    return "\n".join(lines) + "\n"
