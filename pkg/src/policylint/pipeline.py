"""End-to-end analysis shared by the CLI and the review service.

ingest -> rule scan -> ground merge -> classifier hybrid -> completeness ->
readability -> report. A Pipeline is built once from configuration files
(plus an optional knowledge store contributing decision-derived rules and
feedback-recalibrated weights) and can then analyze any number of documents
concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date
from importlib import resources as importlib_resources
from pathlib import Path

from .classifier import ClassifierModel, hybrid_findings, load_model
from .completeness import Checklist, detect_items, load_checklist
from .document import PolicyDocument, ingest_text
from .html_extract import extract_from_html
from .readability import DEFAULT_PENALTY, LegalLexicon, score_document
from .reporting import (
    ComplianceReport,
    CompositeWeights,
    build_report,
    parse_report,
    rank,
    render_machine,
)
from .rules import (
    DEFAULT_CONTEXT_K,
    DEFAULT_SIM_THRESHOLD,
    CompiledRuleSet,
    JurisdictionTable,
    compile_rules,
    load_rules_file,
    merge_grounds,
    reweighted,
    scan,
)
from .store import KnowledgeStore


def data_path(name: str) -> Path:
    return Path(str(importlib_resources.files("policylint") / "data" / name))


DEFAULT_RULES = "default_rules.jsonl"
DEFAULT_CHECKLIST = "default_checklist.jsonl"
DEFAULT_LEXICON = "lexicon_en.txt"
DEFAULT_JURISDICTIONS = "jurisdictions.json"
DEFAULT_CATEGORIES = "category_articles.json"


@dataclass(frozen=True)
class AnalysisConfig:
    language: str = "en"
    jurisdiction: str = "EU"
    as_of: date | None = None  # None resolves to today at analysis time
    granularity: str = "sentence"
    sim_threshold: float = DEFAULT_SIM_THRESHOLD
    tau: float = 0.8
    context_k: int = DEFAULT_CONTEXT_K
    use_context: bool = True
    readability_penalty: float = DEFAULT_PENALTY
    composite: CompositeWeights = field(default_factory=CompositeWeights)

    def __post_init__(self):
        if not 0.0 < self.sim_threshold <= 1.0:
            raise ValueError("sim_threshold must be in (0, 1]")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must be in (0, 1)")
        if self.granularity not in ("sentence", "paragraph"):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.context_k < 0:
            raise ValueError("context_k must be >= 0")

    def resolved_as_of(self) -> date:
        return self.as_of if self.as_of is not None else date.today()


def load_category_articles(path: str | Path) -> dict[str, str]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return dict(data.get("categories", {}))


@dataclass
class Pipeline:
    config: AnalysisConfig
    ruleset: CompiledRuleSet
    checklist: Checklist
    lexicon: LegalLexicon
    jurisdictions: JurisdictionTable
    model: ClassifierModel | None = None
    category_articles: dict[str, str] = field(default_factory=dict)
    store: KnowledgeStore | None = None

    @classmethod
    def build(
        cls,
        config: AnalysisConfig,
        *,
        rules_path: str | Path | None = None,
        checklist_path: str | Path | None = None,
        lexicon_path: str | Path | None = None,
        jurisdictions_path: str | Path | None = None,
        model_path: str | Path | None = None,
        categories_path: str | Path | None = None,
        store: KnowledgeStore | None = None,
    ) -> "Pipeline":
        rules = load_rules_file(rules_path or data_path(DEFAULT_RULES))
        if store is not None:
            rules = reweighted(rules, store.current_weights())
            rules = rules + store.rule_table()
        return cls(
            config=config,
            ruleset=compile_rules(rules),
            checklist=load_checklist(
                checklist_path or data_path(DEFAULT_CHECKLIST), config.jurisdiction
            ),
            lexicon=LegalLexicon.from_file(lexicon_path or data_path(DEFAULT_LEXICON)),
            jurisdictions=JurisdictionTable.from_file(
                jurisdictions_path or data_path(DEFAULT_JURISDICTIONS)
            ),
            model=load_model(model_path) if model_path else None,
            category_articles=load_category_articles(
                categories_path or data_path(DEFAULT_CATEGORIES)
            ),
            store=store,
        )

    def ingest(
        self, raw: str, *, is_html: bool = False, doc_id: str | None = None
    ) -> PolicyDocument:
        cfg = self.config
        if is_html:
            text, heading_marks = extract_from_html(raw)
            return ingest_text(
                text,
                cfg.language,
                cfg.jurisdiction,
                doc_id=doc_id,
                heading_paragraphs=set(heading_marks),
                source_kind="html",
            )
        return ingest_text(raw, cfg.language, cfg.jurisdiction, doc_id=doc_id)

    def analyze(
        self, raw: str, *, is_html: bool = False, doc_id: str | None = None
    ) -> tuple[PolicyDocument, ComplianceReport]:
        cfg = self.config
        as_of = cfg.resolved_as_of()
        doc = self.ingest(raw, is_html=is_html, doc_id=doc_id)
        findings = scan(
            doc,
            self.ruleset,
            as_of,
            granularity=cfg.granularity,
            sim_threshold=cfg.sim_threshold,
            use_context=cfg.use_context,
            context_k=cfg.context_k,
            jurisdictions=self.jurisdictions,
        )
        merged = merge_grounds(findings)
        if self.model is not None:
            merged = hybrid_findings(
                merged,
                self.model,
                doc,
                cfg.tau,
                category_articles=self.category_articles,
                granularity=cfg.granularity,
            )
        statuses = detect_items(doc, self.checklist)
        scores = score_document(doc, self.lexicon, cfg.readability_penalty)
        report = build_report(
            doc,
            merged,
            statuses,
            scores,
            as_of,
            checklist=self.checklist,
            weights=cfg.composite,
        )
        if self.store is not None:
            report = replace(report, percentile=self._percentile(report))
            self.store.save_report(doc.doc_id, render_machine(report).encode("utf-8"))
        return doc, report

    def _percentile(self, report: ComplianceReport) -> float | None:
        assert self.store is not None
        cohort = [
            parse_report(raw)
            for doc_id in self.store.list_report_ids()
            if doc_id != report.doc_id
            and (raw := self.store.load_report_bytes(doc_id)) is not None
        ]
        if not cohort:
            return None
        return rank(report, cohort)
