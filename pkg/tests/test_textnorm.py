from __future__ import annotations

from policylint.textnorm import (
    clause_similarity,
    contains_token_seq,
    fold,
    fold_tokens,
    jaccard,
    normalize_text,
    token_ngrams,
    tokenize,
)


def test_normalize_collapses_spaces_and_crlf():
    assert normalize_text("a  \t b\r\nc") == "a b\nc"


def test_normalize_nfkc_ligature():
    assert normalize_text("oﬃce") == "office"


def test_fold_casefold_and_quotes():
    assert fold("Données") == "données"
    assert fold("DON’T") == "don’t"


def test_tokenize_offsets():
    tokens = tokenize("We don't sell e-mail data.")
    assert [t.text for t in tokens] == ["We", "don't", "sell", "e-mail", "data"]
    for t in tokens:
        assert "We don't sell e-mail data."[t.start : t.end] == t.text


def test_tokenize_skips_symbol_runs():
    assert [t.text for t in tokenize("--- *** 15")] == ["15"]


def test_ngrams_and_jaccard():
    grams = token_ngrams(["a", "b", "c", "d"], 2)
    assert grams == {("a", "b"), ("b", "c"), ("c", "d")}
    assert jaccard({1, 2}, {2, 3}) == 1 / 3
    assert jaccard(set(), set()) == 1.0


def test_short_text_similarity_falls_back_to_token_sets():
    assert clause_similarity(["a", "b"], ["b", "a"]) == 1.0
    assert clause_similarity(["a", "b"], ["c", "d"]) == 0.0


def test_contains_token_seq():
    tokens = fold_tokens("we may share your email address with partners")
    assert contains_token_seq(tokens, ("email", "address"))
    assert not contains_token_seq(tokens, ("postal", "address"))
    assert not contains_token_seq(tokens, ())
