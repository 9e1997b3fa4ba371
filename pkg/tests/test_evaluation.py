from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from sigdose.dosage import DailyDosage, DosageOutcome, IngredientDose, ReasonCode
from sigdose.evaluation import (
    EvalReport,
    ScoringError,
    dosage_from_json,
    dosage_to_json,
    render_eval_table,
    render_outcome_table,
    same_dosage,
    score_end_to_end,
    score_entities,
)


def dd(*triples):
    return DailyDosage(tuple(IngredientDose(F(lo), F(hi), u) for lo, hi, u in triples))


def test_counting_rules():
    gt = {"a": dd((1, 1, "mg")), "b": dd((2, 2, "mg")), "c": dd((3, 3, "mg")), "d": None, "e": None}
    pred = {"a": dd((1, 1, "mg")), "b": dd((2, 4, "mg")), "c": None, "d": dd((1, 1, "mg")), "e": None}
    r = score_end_to_end(pred, gt)
    assert (r.n_correct_extracted, r.n_incorrect_extracted, r.n_missed, r.n_spurious, r.n_both_null) == (1, 1, 1, 1, 1)
    assert (r.tp, r.fp, r.fn) == (1, 2, 2)
    assert r.accuracy == F(2, 5)


def test_null_reason_is_not_scored():
    out = DosageOutcome.null(ReasonCode.SUB_WEEKLY_FREQUENCY)
    assert score_end_to_end({"x": out}, {"x": None}).n_both_null == 1


def test_key_mismatch():
    with pytest.raises(ScoringError, match="missing predictions \\['b'\\]"):
        score_end_to_end({"a": None}, {"a": None, "b": None})


def test_multi_ingredient_must_all_match():
    assert not same_dosage(dd((500, 500, "mcg"), (100, 100, "mcg")), dd((500, 500, "mcg"), (50, 50, "mcg")))
    assert same_dosage(dd((1, 1, "g")), dd((1000, 1000, "mg")))
    assert same_dosage(dosage_from_json(None, 2, "g"), dd((2000, 2000, "mg")))


def test_json_round_trip():
    value = dd((F(15, 2), 15, "mg"), (F(1, 3), F(1, 3), "ml"))
    rows = dosage_to_json(value)
    assert rows[0] == {"min": "7.5", "max": "15", "unit": "mg"}
    back = dosage_from_json([r["min"] for r in rows], [r["max"] for r in rows], [r["unit"] for r in rows])
    assert back == value


def test_entity_scoring_strict():
    gold = {"s": [("DA", 5, 18), ("AF", 19, 37)]}
    pred = {"s": [("DA", 5, 18), ("AF", 19, 25)]}
    scores = score_entities(pred, gold)
    assert (scores["DA"].tp, scores["DA"].fp, scores["DA"].fn) == (1, 0, 0)
    assert (scores["AF"].tp, scores["AF"].fp, scores["AF"].fn) == (0, 1, 1)
    empty = score_entities({"s": []}, gold)
    assert empty["DA"].precision == 0 and empty["DA"].recall == 0


def test_renderings():
    table = render_eval_table(EvalReport.from_counts(800, 7, 23, 8, 162))
    for cell in ("800", "7", "23", "8", "162", "NA"):
        assert cell in table.split()
    outcomes = [(str(i), DosageOutcome(dd((1, 1, "mg")))) for i in range(7)]
    outcomes += [("n1", DosageOutcome.null(ReasonCode.SUB_WEEKLY_FREQUENCY)),
                 ("n2", DosageOutcome.null(ReasonCode.SUB_WEEKLY_FREQUENCY)),
                 ("n3", DosageOutcome.null(ReasonCode.PARSE_FAILURE))]
    text = render_outcome_table(outcomes)
    hist = [line.split() for line in text.splitlines() if line.startswith("  ")]
    assert sum(int(row[-1]) for row in hist) == 3
    assert render_outcome_table([]) == ""


values = st.one_of(
    st.none(),
    st.builds(lambda a, b: dd((min(a, b), max(a, b), "mg")), st.integers(0, 50), st.integers(0, 50)),
)
corpora = st.dictionaries(st.text("abc", min_size=1, max_size=3), values, max_size=20)


@given(corpora, corpora)
def test_counts_partition_corpus(gt, other):
    pred = {k: other.get(k) for k in gt}
    r = score_end_to_end(pred, gt)
    assert r.n == len(gt)


@given(corpora)
def test_self_scoring_is_perfect(x):
    if not any(v is not None for v in x.values()):
        return
    r = score_end_to_end(x, x)
    assert r.precision == r.recall == r.accuracy == 1
