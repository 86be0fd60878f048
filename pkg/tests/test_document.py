from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policylint.document import (
    EmptyDocument,
    UnknownSegment,
    UnsupportedLanguage,
    context_window,
    governing_list_intro,
    ingest_text,
    segment_sentences,
)
from policylint.html_extract import NoExtractableText, extract_from_html


def test_two_paragraphs_two_sentences():
    doc = ingest_text("We collect data.\n\nWe share data.", "en", "FR")
    assert len(doc.paragraphs) == 2
    assert len(doc.sentences) == 2
    assert doc.sentences[0].parent_index == 0
    assert doc.sentences[1].parent_index == 1


def test_whitespace_only_is_empty():
    with pytest.raises(EmptyDocument):
        ingest_text("   \n\t ", "en", "FR")


def test_digits_only_is_empty():
    with pytest.raises(EmptyDocument):
        ingest_text("123 456", "en", "FR")


def test_unsupported_language():
    with pytest.raises(UnsupportedLanguage):
        ingest_text("Hello there.", "xx", "FR")


def test_language_fallback_warns():
    with pytest.warns(UserWarning):
        ingest_text("Hallo Welt.", "de", "DE", allowed_languages={"en", "fr", "de"})


def test_list_intro_flag(rule_policy_doc):
    intros = [s for s in rule_policy_doc.sentences if s.is_list_intro]
    assert len(intros) == 1
    assert intros[0].text.rstrip().endswith("such as:")
    items = [p for p in rule_policy_doc.paragraphs if p.is_list_item]
    assert len(items) == 2


def test_abbreviation_not_a_boundary():
    spans = segment_sentences("We comply with Art. 15 GDPR. You may object.")
    assert len(spans) == 2


def test_no_terminator_single_sentence():
    assert segment_sentences("Contact us") == [(0, 10)]


def test_question_and_statement():
    spans = segment_sentences("Why? Because.")
    assert len(spans) == 2


def test_eg_abbreviation():
    spans = segment_sentences("We use trackers, e.g. cookies. We also use pixels.")
    assert len(spans) == 2


def test_sentence_spans_tile_paragraph():
    text = "First point. Second point! Third?"
    spans = segment_sentences(text)
    assert spans[0][0] == 0
    assert spans[-1][1] == len(text)
    for (_, end), (start, _) in zip(spans, spans[1:]):
        assert end == start


def test_doc_id_is_content_stable():
    a = ingest_text("We collect data.", "en", "FR")
    b = ingest_text("We collect data.", "en", "FR")
    c = ingest_text("We collect data.", "en", "DE")
    assert a.doc_id == b.doc_id
    assert a.doc_id != c.doc_id


def test_normalization_nfkc_and_crlf():
    doc = ingest_text("We  “collect”\tdata.\r\nMore text here.", "en", "FR")
    assert "\r" not in doc.raw_text
    assert "  " not in doc.raw_text.split("\n")[0]


# -- invariants over generated documents --------------------------------------

words = st.lists(
    st.sampled_from(["data", "we", "collect", "share", "你好", "café", "Art"]),
    min_size=1,
    max_size=6,
)
sentence_texts = words.map(lambda ws: " ".join(ws).capitalize() + ".")
paragraph_texts = st.lists(sentence_texts, min_size=1, max_size=4).map(" ".join)
doc_texts = st.lists(paragraph_texts, min_size=1, max_size=5).map("\n\n".join)


@given(doc_texts)
@settings(max_examples=150, deadline=None)
def test_span_invariants(text):
    doc = ingest_text(text, "en", "FR")
    raw = doc.raw_text
    for pool in (doc.paragraphs, doc.sentences):
        for seg in pool:
            assert seg.text == raw[seg.span[0] : seg.span[1]]
        for a, b in zip(pool, pool[1:]):
            assert a.span[1] <= b.span[0]
    para_cover = {i for p in doc.paragraphs for i in range(*p.span)}
    sent_cover = {i for s in doc.sentences for i in range(*s.span)}
    assert para_cover == sent_cover
    for s in doc.sentences:
        parent = doc.paragraphs[s.parent_index]
        assert parent.span[0] <= s.span[0] and s.span[1] <= parent.span[1]


@given(doc_texts)
@settings(max_examples=50, deadline=None)
def test_segmentation_is_deterministic(text):
    a = ingest_text(text, "en", "FR")
    b = ingest_text(text, "en", "FR")
    assert a == b


# -- context windows --------------------------------------------------------


def test_window_at_document_start(rule_policy_doc):
    first = rule_policy_doc.sentences[0]
    win = context_window(rule_policy_doc, first.segment_id, 1)
    assert win.before == ()
    assert len(win.after) == 1


def test_window_interior(rule_policy_doc):
    # paragraph 2 has two sentences; use a mid-document sentence instead
    sent = rule_policy_doc.sentences[2]  # second sentence of paragraph 1
    win = context_window(rule_policy_doc, sent.segment_id, 2)
    assert len(win.before) >= 1
    assert len(win.after) == 2


def test_list_item_window_includes_intro_even_at_k0(rule_policy_doc):
    items = [s for s in rule_policy_doc.sentences if s.is_list_item]
    assert items
    win = context_window(rule_policy_doc, items[-1].segment_id, 0)
    assert any(s.is_list_intro for s in win.before)
    assert win.after == ()


def test_governing_intro_stops_at_non_item(rule_policy_doc):
    # the closing paragraph is not a list item, so it has no governing intro
    last = rule_policy_doc.sentences[-1]
    assert governing_list_intro(rule_policy_doc, last) is None


def test_unknown_segment():
    doc = ingest_text("Only one sentence here.", "en", "FR")
    with pytest.raises(UnknownSegment):
        context_window(doc, f"{doc.doc_id}:sentence:99", 1)
    with pytest.raises(UnknownSegment):
        context_window(doc, "other:sentence:0", 1)


def test_window_never_crosses_heading():
    text, marks = extract_from_html(
        "<p>Intro text here.</p><h2>Your rights</h2><p>You may object.</p>"
    )
    doc = ingest_text(text, "en", "FR", heading_paragraphs=set(marks))
    first = doc.sentences[0]
    win = context_window(doc, first.segment_id, 5)
    assert all(not s.is_heading for s in win.after)
    assert len(win.after) == 0  # heading immediately follows


# -- html extraction ----------------------------------------------------------


def test_html_two_blocks():
    text, marks = extract_from_html("<p>Hello</p><p>World</p>")
    assert text == "Hello\n\nWorld"
    assert marks == []


def test_html_heading_marked():
    text, marks = extract_from_html(
        "<h2>Your rights</h2><p>You may access your data.</p>"
    )
    assert text.split("\n\n")[0] == "Your rights"
    assert marks == [0]


def test_html_script_dropped():
    text, _ = extract_from_html("<script>x()</script><p>We collect data.</p>")
    assert text == "We collect data."


def test_html_empty_raises():
    with pytest.raises(NoExtractableText):
        extract_from_html("<script>nothing()</script><style>.a{}</style>")


def test_html_list_items_become_item_paragraphs():
    text, marks = extract_from_html(
        "<p>We collect, such as:</p><ul><li>your name</li><li>your email</li></ul>"
    )
    doc = ingest_text(text, "en", "FR", heading_paragraphs=set(marks))
    assert [p.is_list_item for p in doc.paragraphs] == [False, True, True]
    assert doc.paragraphs[0].is_list_intro


def test_html_ingest_has_no_markup():
    html = "<div><p>We <b>collect</b> data.</p><script>bad()</script></div>"
    text, marks = extract_from_html(html)
    doc = ingest_text(text, "en", "FR", heading_paragraphs=set(marks))
    for seg in doc.sentences + doc.paragraphs:
        assert "<" not in seg.text and ">" not in seg.text
