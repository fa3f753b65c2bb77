import pytest
from hypothesis import given, strategies as st

from madp.classify import (AdapterError, FallbackRequired, classify,
                           classify_external, crop_header, header_vector,
                           signatures_from_json, signatures_to_json,
                           train_signatures)
from madp.model import (CategoryLabel, DocType, Page, PipelineConfig,
                        TextBlock, UNKNOWN_LABEL)

CFG = PipelineConfig()


def _page(texts, y0=0.05):
    blocks = tuple(TextBlock(t, 0.05, y0 + 0.05 * i, 0.9, y0 + 0.05 * i + 0.03, 12.0)
                   for i, t in enumerate(texts))
    return Page(0, blocks)


blocks_strategy = st.lists(
    st.builds(
        lambda y, txt: TextBlock(txt, 0.1, y, 0.9, min(1.0, y + 0.01), 10.0),
        st.floats(min_value=0.0, max_value=0.98),
        st.text(min_size=1, max_size=12),
    ),
    max_size=12,
)


@given(blocks_strategy, st.floats(min_value=0.01, max_value=1.0),
       st.floats(min_value=0.01, max_value=1.0))
def test_crop_header_monotone(blocks, f1, f2):
    lo, hi = sorted((f1, f2))
    page = Page(0, tuple(blocks))
    assert set(map(id, crop_header(page, lo))) <= set(map(id, crop_header(page, hi)))


def test_header_vector_is_normalized():
    vec = header_vector([TextBlock("ACME S.p.A. invoice", 0.1, 0.1, 0.9, 0.2)])
    assert abs(sum(w * w for w in vec.values()) - 1.0) < 1e-9
    assert header_vector([]) == {}


def test_classify_fixture_categories(corpus):
    labeled = [(b, CategoryLabel(corpus.truths[b.doc_id].category[0],
                                 DocType(corpus.truths[b.doc_id].category[1]), 1.0))
               for b in corpus.bundles]
    sigs = train_signatures(labeled, CFG)
    wrong = 0
    for bundle, label in labeled:
        got = classify(bundle.pages[0], sigs, CFG)
        if got.category != label.category:
            wrong += 1
        assert got.confidence >= CFG.split_confidence
    assert wrong == 0


def test_unclassifiable_page_is_unknown():
    labeled_page = _page(["ACME S.p.A.", "FATTURA N. 1"])
    sigs = train_signatures([(  # train on one category
        type("B", (), {"pages": (labeled_page,)})(),
        CategoryLabel("ACME", DocType.INVOICE, 1.0))], CFG)
    blank = Page(0, ())
    assert classify(blank, sigs, CFG) == UNKNOWN_LABEL
    dissimilar = _page(["zzz qqq www xxx yyy 123 456"])
    got = classify(dissimilar, sigs, CFG)
    assert got.doc_type == DocType.OTHER and got.supplier_id == "unknown"


def test_train_requires_data():
    with pytest.raises(ValueError):
        train_signatures([])


def test_signature_json_roundtrip(corpus):
    labeled = [(b, CategoryLabel(corpus.truths[b.doc_id].category[0],
                                 DocType(corpus.truths[b.doc_id].category[1]), 1.0))
               for b in corpus.bundles[:10]]
    sigs = train_signatures(labeled, CFG)
    assert signatures_from_json(signatures_to_json(sigs)) == sigs


class TestExternalAdapter:
    def test_passthrough(self):
        label = classify_external("hdr", lambda body: {
            "supplier": "ACME", "doc_type": "invoice", "confidence": 0.97})
        assert label == CategoryLabel("ACME", DocType.INVOICE, 0.97)

    def test_retries_then_fallback(self):
        calls, delays = [], []

        def post(body):
            calls.append(body)
            raise ConnectionError("down")

        with pytest.raises(FallbackRequired):
            classify_external("hdr", post, sleep=delays.append)
        assert len(calls) == 3
        assert delays == [0.2, 0.4]  # exponential backoff between attempts

    def test_recovers_on_second_attempt(self):
        attempts = iter([ConnectionError("boom"), {
            "supplier": "X", "doc_type": "delivery_note", "confidence": 0.5}])

        def post(body):
            item = next(attempts)
            if isinstance(item, Exception):
                raise item
            return item

        label = classify_external("hdr", post, sleep=lambda s: None)
        assert label.supplier_id == "X"

    def test_malformed_response(self):
        with pytest.raises(AdapterError):
            classify_external("hdr", lambda body: {"supplier": "A", "doc_type": "invoice"})
        with pytest.raises(AdapterError):
            classify_external("hdr", lambda body: {"supplier": "A", "doc_type": "postcard",
                                                   "confidence": 0.5})
