from __future__ import annotations

import math
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_nb_posterior
from policylint.classifier import (
    EmptyCorpus,
    EmptyText,
    InsufficientLabels,
    LabeledClause,
    UnknownLabel,
    hybrid_findings,
    load_model,
    predict,
    predict_label,
    save_model,
    top_tokens,
    train,
)
from policylint.document import ingest_text
from policylint.rules import ComplianceLabel, compile_rules, scan

AS_OF = date(2026, 1, 15)

TOY_CORPUS = [
    LabeledClause("we retain data indefinitely", "problematic"),
    LabeledClause("we share data with anyone indefinitely", "problematic"),
    LabeledClause("you can delete your account data", "compliant"),
    LabeledClause("we explain every purpose clearly", "compliant"),
]


def toy_pairs(corpus):
    return [(c.label, c.text) for c in corpus]


def test_single_label_rejected():
    with pytest.raises(InsufficientLabels):
        train([LabeledClause("a b", "only"), LabeledClause("c d", "only")])


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        train([])


def test_balanced_priors():
    model = train(TOY_CORPUS)
    assert math.exp(model.class_priors["problematic"]) == pytest.approx(0.5, abs=1e-12)
    assert math.exp(model.class_priors["compliant"]) == pytest.approx(0.5, abs=1e-12)


def test_hand_computed_laplace_likelihood():
    model = train(TOY_CORPUS, alpha=1.0)
    # "indefinitely" appears twice under problematic; the two problematic
    # clauses hold 4 + 6 = 10 tokens; the joint vocabulary has 16 distinct
    # tokens, so the add-1 estimate is (2 + 1) / (10 + 16).
    v = len(model.vocabulary)
    assert v == 16
    idx = model.vocabulary["indefinitely"]
    expected = (2 + 1) / (10 + v)
    assert math.exp(model.token_log_likelihoods["problematic"][idx]) == pytest.approx(
        expected, abs=1e-12
    )


def test_likelihoods_and_priors_sum_to_one():
    model = train(TOY_CORPUS)
    assert sum(math.exp(p) for p in model.class_priors.values()) == pytest.approx(1, abs=1e-9)
    for lab in model.labels:
        total = sum(math.exp(lp) for lp in model.token_log_likelihoods[lab])
        assert total == pytest.approx(1.0, abs=1e-9)


def test_oov_only_text_returns_priors():
    model = train(TOY_CORPUS)
    posterior = predict(model, "zebra quantum xylophone")
    for lab in model.labels:
        assert posterior[lab] == pytest.approx(math.exp(model.class_priors[lab]), abs=1e-12)


def test_empty_text_raises():
    model = train(TOY_CORPUS)
    with pytest.raises(EmptyText):
        predict(model, "?!...")


def test_predict_matches_fraction_oracle():
    model = train(TOY_CORPUS)
    for query in (
        "retain data indefinitely",
        "delete your account",
        "we share every purpose",
        "data data data",
    ):
        got = predict(model, query)
        expected = oracle_nb_posterior(toy_pairs(TOY_CORPUS), 1.0, query)
        for lab in model.labels:
            assert got[lab] == pytest.approx(float(expected[lab]), abs=1e-9)


def test_training_clause_classified_correctly():
    model = train(TOY_CORPUS)
    for clause in TOY_CORPUS:
        label, _ = predict_label(model, clause.text)
        assert label == clause.label


def test_posteriors_sum_to_one():
    model = train(TOY_CORPUS)
    posterior = predict(model, "we retain your data")
    assert sum(posterior.values()) == pytest.approx(1.0, abs=1e-9)


def test_duplicating_corpus_keeps_argmax():
    model_once = train(TOY_CORPUS)
    model_twice = train(TOY_CORPUS * 2)
    for text in ("we retain data", "you can delete your account", "purpose clearly"):
        assert predict_label(model_once, text)[0] == predict_label(model_twice, text)[0]


def test_token_order_invariance():
    model = train(TOY_CORPUS)
    a = predict(model, "we retain data indefinitely")
    b = predict(model, "indefinitely data retain we")
    for lab in model.labels:
        assert a[lab] == pytest.approx(b[lab], abs=1e-12)


# -- randomized agreement with the exact oracle --------------------------------

vocab_words = st.sampled_from(
    ["data", "we", "retain", "share", "delete", "purpose", "consent", "you", "sell"]
)
clause_texts = st.lists(vocab_words, min_size=1, max_size=8).map(" ".join)


@st.composite
def corpora(draw):
    labels = draw(st.sampled_from([("a", "b"), ("a", "b", "c")]))
    clauses = []
    for lab in labels:  # every label needs at least one clause
        clauses.append((lab, draw(clause_texts)))
    extra = draw(st.lists(st.tuples(st.sampled_from(labels), clause_texts), max_size=26))
    return clauses + extra


@given(corpus=corpora(), query=clause_texts, alpha=st.sampled_from([1.0, 0.5, 2.0]))
@settings(max_examples=150, deadline=None)
def test_train_predict_agree_with_oracle(corpus, query, alpha):
    model = train([LabeledClause(text, lab) for lab, text in corpus], alpha=alpha)
    expected = oracle_nb_posterior(corpus, alpha, query)
    got = predict(model, query)
    for lab in model.labels:
        assert got[lab] == pytest.approx(float(expected[lab]), abs=1e-9)


# -- top tokens -----------------------------------------------------------------


def test_top_tokens_discriminative():
    model = train(TOY_CORPUS)
    ranked = top_tokens(model, "problematic", 3)
    assert ranked[0] == "indefinitely"


def test_top_tokens_k_truncation():
    model = train(TOY_CORPUS)
    full = top_tokens(model, "problematic", 10_000)
    assert len(full) == len(model.vocabulary)
    assert top_tokens(model, "problematic", 1) == full[:1]


def test_top_tokens_unknown_label():
    model = train(TOY_CORPUS)
    with pytest.raises(UnknownLabel):
        top_tokens(model, "nope", 3)


# -- persistence ------------------------------------------------------------------


def test_model_roundtrip_bit_exact(tmp_path):
    model = train(TOY_CORPUS, alpha=1.0)
    path = tmp_path / "model.jsonl"
    save_model(model, path)
    first = path.read_bytes()
    reloaded = load_model(path)
    save_model(reloaded, path)
    assert path.read_bytes() == first
    for text in ("we retain data", "delete your account"):
        assert predict(model, text) == predict(reloaded, text)


# -- hybrid -----------------------------------------------------------------------


def _toy_rule():
    from policylint.rules import LegalBasis, Rule

    return Rule(
        rule_id="kw",
        kind="keyword",
        pattern="indefinitely",
        label=ComplianceLabel.PROBLEMATIC,
        grounds=(LegalBasis.gdpr_article("5(1)(e)"),),
        jurisdiction="EU",
        language="en",
        effective_from=date(2018, 5, 25),
    )


def test_hybrid_is_superset_and_adds_classifier_finding():
    doc = ingest_text(
        "We keep backups indefinitely.\n\nwe share data with anyone\n\n"
        "Contact support during business hours.",
        "en",
        "FR",
    )
    model = train(TOY_CORPUS)
    rule_findings = scan(doc, compile_rules([_toy_rule()]), AS_OF)
    posterior = predict(model, "we share data with anyone")
    assert posterior["problematic"] > 0.8  # fixture sanity
    combined = hybrid_findings(
        rule_findings, model, doc, 0.8, category_articles={"problematic": "12(1)"}
    )
    assert {f.segment_id for f in rule_findings} <= {f.segment_id for f in combined}
    added = [f for f in combined if not f.matched_rules]
    assert len(added) == 1
    assert added[0].label == ComplianceLabel.PROBLEMATIC
    assert added[0].grounds[0].article == "12(1)"
    assert added[0].confidence == pytest.approx(posterior["problematic"])


def test_hybrid_never_overrides_rule_findings():
    doc = ingest_text("we share data with anyone indefinitely", "en", "FR")
    model = train(TOY_CORPUS)
    rule_findings = scan(doc, compile_rules([_toy_rule()]), AS_OF)
    combined = hybrid_findings(
        rule_findings, model, doc, 0.8, category_articles={"problematic": "12(1)"}
    )
    assert combined == rule_findings


def test_hybrid_no_model_overlap_returns_rule_findings_only():
    doc = ingest_text("Totally unrelated gardening advice column.", "en", "FR")
    model = train(TOY_CORPUS)
    combined = hybrid_findings(
        [], model, doc, 0.8, category_articles={"problematic": "12(1)"}
    )
    assert combined == []
