import pytest
from hypothesis import given, settings, strategies as st

from sigdose.extraction import (
    CompoundKind,
    ExtractorContractError,
    Span,
    extract,
    extract_basic,
    extract_external,
    time_slot,
)
from sigdose.lexicon import EntityType
from sigdose.tokenize import tokenize


def texts(group):
    return [c.text for c in group]


def test_two_tablets_twice_daily_entities():
    r = extract("Take two tablets twice daily")
    assert [(b.text, b.entity_type) for b in r.basics] == [
        ("two", EntityType.NUMERICAL_VALUE),
        ("tablets", EntityType.FORM),
        ("twice", EntityType.NUMERICAL_VALUE),
        ("daily", EntityType.FREQUENCY),
    ]
    assert texts(r.das) == ["two tablets"]
    assert texts(r.afs) == ["twice daily"]
    assert texts(r.des) == ["two tablets twice daily"]


def test_am_pm_two_expressions():
    r = extract("Take one tab in am and two tabs in pm")
    assert texts(r.das) == ["one tab", "two tabs"]
    assert [time_slot(a.text.split()[-1]) for a in r.afs] == ["morning", "evening"]
    assert len(r.des) == 2


def test_restated_number_is_one_value():
    r = extract("Take one(1) tablet two(2) times daily")
    assert texts(r.das) == ["one(1) tablet"]
    assert texts(r.afs) == ["two(2) times daily"]


def test_tokenizer_offsets():
    sig = "1/2 tab p.o. b.i.d."
    for t in tokenize(sig):
        assert sig[t.start:t.end] == t.text
    assert [t.key for t in tokenize(sig) if not t.is_punct] == ["1/2", "tab", "po", "bid"]


def test_interval_frequency_and_cap():
    r = extract("Take 1-2 tablets by mouth every 6 hours as needed for Pain (max = 6 tabs/day).")
    assert texts(r.das) == ["1-2 tablets by mouth"]
    assert texts(r.afs) == ["every 6 hours"]
    assert len(r.caps) == 1 and r.caps[0].amount == 6


def test_unpaired_dose():
    r = extract("Take 1 tablet by mouth.")
    assert not r.des
    assert texts(r.unpaired_das) == ["1 tablet by mouth"]


def test_span_validation():
    with pytest.raises(ValueError):
        Span.of("abc", 2, 2)
    with pytest.raises(ValueError):
        Span.of("abc", 0, 4)


def test_external_entities_contract():
    sig = "Take 2 tablets twice daily"
    ents = [("Dosage", Span(5, 14, "")), ("Frequency", Span(15, 26, ""))]
    r = extract_external(sig, ents)
    assert texts(r.des) == ["2 tablets twice daily"]
    with pytest.raises(ExtractorContractError):
        extract_external(sig, [("Dosage", Span(5, 40, ""))])
    with pytest.raises(ExtractorContractError):
        extract_external(sig, [("Colour", Span(5, 14, ""))])
    with pytest.raises(ExtractorContractError):
        extract_external(sig, [("Dosage", Span(5, 14, "")), ("Dosage", Span(7, 14, ""))])


def check_spans(result):
    sig = result.sig
    for span in result.spans():
        assert 0 <= span.start < span.end <= len(sig)
        assert sig[span.start:span.end] == span.text
    for de in result.des:
        assert de.kind is CompoundKind.DE
        assert de.span.contains(de.da.span) and de.span.contains(de.af.span)
        assert de.da in result.das and de.af in result.afs
    for comp in result.das + result.afs:
        for b in comp.basics:
            assert comp.span.contains(b.span)


words = st.sampled_from(
    "take 1 2 1/2 one two(2) tab tablets mg 5 ml po by mouth daily bid twice q week every 4-6 hours "
    "and in am pm at bedtime as needed for pain ( ) . , ; max = 6 tabs/day other".split()
)


@settings(max_examples=200)
@given(st.lists(words, max_size=14))
def test_span_integrity_on_word_salad(ws):
    check_spans(extract(" ".join(ws)))


@settings(max_examples=200)
@given(st.text(max_size=60))
def test_arbitrary_text_never_crashes(sig):
    result = extract(sig)
    check_spans(result)
    assert len(result.des) + len(result.unpaired_das) == len(result.das)
    assert len(result.des) + len(result.unpaired_afs) == len(result.afs)


def test_basic_entities_do_not_overlap():
    basics = extract_basic("Take 1 teaspoon(s) as needed for cough every 4 hrs.")
    for a, b in zip(basics, basics[1:]):
        assert a.span.end <= b.span.start
