"""Multinomial naive Bayes over clause categories, plus the rule hybrid.

The model stores integer token counts per label; log-priors and Laplace
log-likelihoods are derived deterministically from them, which makes the
serialized form bit-exact under a save/load/save round trip. Classifier
additions to a scan are always capped at "problematic": only an authority
decision can ground an unlawful label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import recordio
from .document import PolicyDocument
from .errors import PolicyLintError
from .rules import ComplianceLabel, Finding, LegalBasis
from .textnorm import fold_tokens, normalize_clause

PROB_TOL = 1e-9
DEFAULT_TAU = 0.8


class InsufficientLabels(PolicyLintError):
    pass


class EmptyCorpus(PolicyLintError):
    pass


class EmptyText(PolicyLintError):
    pass


class UnknownLabel(PolicyLintError):
    pass


CLAUSE_SOURCES = ("case_study", "decision", "feedback", "import")


@dataclass(frozen=True)
class LabeledClause:
    text: str
    label: str
    language: str = "en"
    source: str = "case_study"

    def __post_init__(self):
        if not normalize_clause(self.text):
            raise ValueError("clause text is empty after normalization")
        if self.source not in CLAUSE_SOURCES:
            raise ValueError(f"unknown clause source {self.source!r}")


@dataclass(frozen=True)
class ClassifierModel:
    alpha: float
    labels: tuple[str, ...]  # lexicographic
    vocabulary: dict[str, int]  # token -> index, lexicographic
    doc_counts: dict[str, int]  # training clauses per label
    token_counts: dict[str, tuple[int, ...]]  # label -> counts over vocabulary
    class_priors: dict[str, float]  # label -> log prior
    token_log_likelihoods: dict[str, tuple[float, ...]]  # label -> log P(token|label)

    @property
    def label_totals(self) -> dict[str, int]:
        return {lab: sum(c) for lab, c in self.token_counts.items()}


def _derive_logs(alpha, labels, vocab_size, doc_counts, token_counts):
    total_docs = sum(doc_counts.values())
    priors = {lab: math.log(doc_counts[lab] / total_docs) for lab in labels}
    logliks = {}
    for lab in labels:
        counts = token_counts[lab]
        denom = sum(counts) + alpha * vocab_size
        logliks[lab] = tuple(math.log((c + alpha) / denom) for c in counts)
    return priors, logliks


def train(corpus: list[LabeledClause], alpha: float = 1.0) -> ClassifierModel:
    """Fit add-alpha multinomial counts over the joint vocabulary."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if not corpus:
        raise EmptyCorpus("no training clauses")
    labels = tuple(sorted({c.label for c in corpus}))
    if len(labels) < 2:
        raise InsufficientLabels(f"need >= 2 labels, got {labels}")
    tokenized = [(c.label, fold_tokens(c.text)) for c in corpus]
    vocab_tokens = sorted({t for _, toks in tokenized for t in toks})
    vocabulary = {t: i for i, t in enumerate(vocab_tokens)}
    doc_counts = {lab: 0 for lab in labels}
    counts = {lab: [0] * len(vocabulary) for lab in labels}
    for lab, toks in tokenized:
        doc_counts[lab] += 1
        row = counts[lab]
        for t in toks:
            row[vocabulary[t]] += 1
    token_counts = {lab: tuple(row) for lab, row in counts.items()}
    priors, logliks = _derive_logs(alpha, labels, len(vocabulary), doc_counts, token_counts)
    model = ClassifierModel(
        alpha=alpha,
        labels=labels,
        vocabulary=vocabulary,
        doc_counts=doc_counts,
        token_counts=token_counts,
        class_priors=priors,
        token_log_likelihoods=logliks,
    )
    validate_model(model)
    return model


def validate_model(model: ClassifierModel) -> None:
    prior_sum = sum(math.exp(p) for p in model.class_priors.values())
    if abs(prior_sum - 1.0) > PROB_TOL:
        raise ValueError(f"priors sum to {prior_sum}, not 1")
    for lab in model.labels:
        if model.vocabulary:
            s = sum(math.exp(lp) for lp in model.token_log_likelihoods[lab])
            if abs(s - 1.0) > PROB_TOL:
                raise ValueError(f"likelihoods for {lab!r} sum to {s}, not 1")


def predict(model: ClassifierModel, text: str) -> dict[str, float]:
    """Posterior distribution over labels; OOV tokens are ignored."""
    tokens = fold_tokens(text)
    if not tokens:
        raise EmptyText("no tokens to classify")
    indexes = [model.vocabulary[t] for t in tokens if t in model.vocabulary]
    scores = {}
    for lab in model.labels:
        loglik = model.token_log_likelihoods[lab]
        scores[lab] = model.class_priors[lab] + sum(loglik[i] for i in indexes)
    peak = max(scores.values())
    norm = peak + math.log(sum(math.exp(s - peak) for s in scores.values()))
    return {lab: math.exp(scores[lab] - norm) for lab in model.labels}


def predict_label(model: ClassifierModel, text: str) -> tuple[str, float]:
    """Argmax label; ties go to the lexicographically smallest label."""
    posterior = predict(model, text)
    label = min(model.labels, key=lambda lab: (-posterior[lab], lab))
    return label, posterior[label]


def top_tokens(model: ClassifierModel, label: str, k: int) -> list[str]:
    """Tokens ranked by log-odds for ``label`` against the rest."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if label not in model.labels:
        raise UnknownLabel(f"no label {label!r} in model")
    others = [lab for lab in model.labels if lab != label]
    v = len(model.vocabulary)
    other_totals = sum(sum(model.token_counts[lab]) for lab in others)
    scored = []
    for token, i in model.vocabulary.items():
        lp = model.token_log_likelihoods[label][i]
        other_count = sum(model.token_counts[lab][i] for lab in others)
        lq = math.log((other_count + model.alpha) / (other_totals + model.alpha * v))
        scored.append((lp - lq, token))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [token for _, token in scored[:k]]


def hybrid_findings(
    rule_findings: list[Finding],
    model: ClassifierModel,
    doc: PolicyDocument,
    tau: float = DEFAULT_TAU,
    *,
    category_articles: Mapping[str, str],
    granularity: str = "sentence",
) -> list[Finding]:
    """Rule findings plus classifier flags on uncovered segments.

    A segment with no rule finding whose posterior for a category listed in
    ``category_articles`` reaches tau gets a problematic finding grounded in
    that category's article. Rule findings pass through unchanged.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    covered = {f.segment_id for f in rule_findings}
    out = list(rule_findings)
    for seg in doc.segments(granularity):
        if seg.segment_id in covered:
            continue
        if not fold_tokens(seg.text):
            continue
        posterior = predict(model, seg.text)
        candidates = [
            (posterior[lab], lab)
            for lab in model.labels
            if lab in category_articles and posterior[lab] >= tau
        ]
        if not candidates:
            continue
        prob, category = min(candidates, key=lambda pair: (-pair[0], pair[1]))
        out.append(
            Finding(
                finding_id=seg.segment_id,
                doc_id=doc.doc_id,
                segment_id=seg.segment_id,
                label=ComplianceLabel.PROBLEMATIC,
                grounds=(LegalBasis.gdpr_article(category_articles[category]),),
                matched_rules=(),
                confidence=prob,
                context_used=False,
                granularity=seg.granularity,
                segment_index=seg.index,
            )
        )
    out.sort(key=lambda f: (f.segment_index, f.label))
    return out


# --- model persistence --------------------------------------------------------


def save_model(model: ClassifierModel, path: str | Path) -> None:
    records = [{"kind": "meta", "alpha": model.alpha, "labels": list(model.labels)}]
    for lab in model.labels:
        records.append({"kind": "label", "label": lab, "documents": model.doc_counts[lab]})
    for token in sorted(model.vocabulary):
        i = model.vocabulary[token]
        records.append(
            {
                "kind": "token",
                "token": token,
                "counts": [model.token_counts[lab][i] for lab in model.labels],
            }
        )
    recordio.write_records(path, "model", records)


def load_model(path: str | Path) -> ClassifierModel:
    records = recordio.read_records(path, "model")
    if not records or records[0].get("kind") != "meta":
        raise recordio.BadRecordFile(path, "missing meta record")
    meta = records[0]
    alpha = float(meta["alpha"])
    labels = tuple(meta["labels"])
    doc_counts = {}
    tokens: list[tuple[str, list[int]]] = []
    for rec in records[1:]:
        if rec["kind"] == "label":
            doc_counts[rec["label"]] = int(rec["documents"])
        elif rec["kind"] == "token":
            tokens.append((rec["token"], [int(c) for c in rec["counts"]]))
    vocabulary = {tok: i for i, (tok, _) in enumerate(tokens)}
    token_counts = {
        lab: tuple(counts[j] for _, counts in tokens) for j, lab in enumerate(labels)
    }
    priors, logliks = _derive_logs(alpha, labels, len(vocabulary), doc_counts, token_counts)
    model = ClassifierModel(
        alpha=alpha,
        labels=labels,
        vocabulary=vocabulary,
        doc_counts=doc_counts,
        token_counts=token_counts,
        class_priors=priors,
        token_log_likelihoods=logliks,
    )
    validate_model(model)
    return model


def clause_to_json(clause: LabeledClause) -> dict:
    return {
        "text": clause.text,
        "category": clause.label,
        "language": clause.language,
        "source": clause.source,
    }


def clause_from_json(obj: dict, source: str | None = None) -> LabeledClause:
    return LabeledClause(
        text=obj["text"],
        label=obj["category"],
        language=obj.get("language", "en"),
        source=source or obj.get("source", "case_study"),
    )


def load_clauses_file(path: str | Path) -> list[LabeledClause]:
    return [clause_from_json(rec) for rec in recordio.read_records(path, "clauses")]
