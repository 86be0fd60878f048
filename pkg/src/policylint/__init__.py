"""GDPR compliance engine for privacy documents.

Detects problematic and unlawful clauses with traceable legal bases, checks
mandatory disclosures, scores readability, and feeds reviewer verdicts back
into rule confidence weights.
"""

__version__ = "0.1.0"

from .document import PolicyDocument, Segment, ingest_text
from .pipeline import AnalysisConfig, Pipeline
from .reporting import ComplianceReport, parse_report, render
from .rules import ComplianceLabel, Finding, LegalBasis, Rule

__all__ = [
    "__version__",
    "AnalysisConfig",
    "ComplianceLabel",
    "ComplianceReport",
    "Finding",
    "LegalBasis",
    "Pipeline",
    "PolicyDocument",
    "Rule",
    "Segment",
    "ingest_text",
    "parse_report",
    "render",
]
