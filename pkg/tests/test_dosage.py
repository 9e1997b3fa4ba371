from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from sigdose import MedicationOrder, ReasonCode, daily_dosage
from sigdose.dosage import (
    DosageConflict,
    DosageOutcome,
    IngredientDose,
    NormalizedDE,
    calculate_daily_dosage,
    combine_des,
    normalize_de,
)
from sigdose.extraction import extract
from sigen import additive_sig, corner_oracle, corner_sig, strength_text, weekly_sig


def values(outcome):
    assert not outcome.is_null, outcome
    return [(d.min_per_day, d.max_per_day, d.unit) for d in outcome.value.per_ingredient]


def nde(sig):
    (de,) = extract(sig).des
    return normalize_de(de)


def test_normalize_examples():
    n = nde("two tablets twice daily")
    assert (n.da_min, n.af_per_day_min) == (2, 2)
    n = nde("1 tab q week")
    assert n.af_per_day_max == F(1, 7)
    n = nde("1-2 tablets every 6 hours")
    assert (n.da_min, n.da_max, n.af_per_day_min, n.af_per_day_max) == (1, 2, 4, 4)


def test_combine_rules():
    am, pm = extract("one tab in am and two tabs in pm").des
    assert combine_des([normalize_de(am), normalize_de(pm)]) == (3, 3)
    dup = nde("1 tab daily")
    assert combine_des([dup, dup]) == (1, 1)
    with pytest.raises(DosageConflict):
        combine_des([nde("0.25 tab daily"), nde("0.5 tab daily")])


@pytest.mark.parametrize(
    "sig, strength, expected",
    [
        ("Take two tablets twice daily", "50mg", [(200, 200, "mg")]),
        ("1 tab po q week", "7mg", [(1, 1, "mg")]),
        ("Take 20 mg by mouth daily", "10 mg", [(20, 20, "mg")]),
        ("Take 1 tablet every other day", "10 mg", [(5, 5, "mg")]),
        ("Take 1 g by mouth twice daily", "500 mg", [(2000, 2000, "mg")]),
        ("Take 1 tablet (25 mg total) by mouth daily at bedtime", "25 mg", [(25, 25, "mg")]),
        ("Take 1 tablet every 6 hours", "300 MG-30 MG", [(1200, 1200, "mg"), (120, 120, "mg")]),
    ],
)
def test_values(sig, strength, expected):
    assert values(daily_dosage(sig, strength)) == expected


@pytest.mark.parametrize(
    "sig, reason",
    [
        ("Take as directed.", ReasonCode.NEED_MORE_INFO_UNINFORMATIVE),
        ("Take 1 tablet by mouth.", ReasonCode.NEED_MORE_INFO_MISSING_FREQUENCY),
        ("Take by mouth twice daily", ReasonCode.NEED_MORE_INFO_MISSING_DOSE),
        ("1000mcg IM monthly", ReasonCode.SUB_WEEKLY_FREQUENCY),
        ("Take 1 tablet by mouth one time only.", ReasonCode.NOT_MEANINGFUL_ONE_TIME),
        ("one(1) tablet at onset of headache", ReasonCode.NOT_MEANINGFUL_NON_ROUTINE),
        ("Take one tablet Mon-Wed-Thur-Sat", ReasonCode.VARIABLE_DOSE_OVER_DAYS),
        ("Use 1 Drop in the left eye twice daily", ReasonCode.UNQUANTIFIABLE_FORM),
        ("Apply to affected area twice daily", ReasonCode.UNQUANTIFIABLE_FORM),
    ],
)
def test_null_reasons(sig, reason):
    assert daily_dosage(sig, "10 mg").null_reason is reason


def test_strength_problems():
    out = daily_dosage("Take 1 tablet daily", "see label")
    assert out.null_reason is ReasonCode.STRENGTH_UNAVAILABLE
    out = daily_dosage("Take 1 tablet daily", "")
    assert values(out) == [(1, 1, "form:tablet")]


def test_unit_based_dose_with_other_strength_unit():
    out = daily_dosage("Take 1 teaspoon(s) every 4 hrs", "100 mg/5 ml")
    assert values(out) == [(30, 30, "ml")]
    assert any("differs" in d for d in out.diagnostics)


def test_prn_min_zero_is_opt_in():
    sig = "Take 1-2 tablets by mouth every 6 hours as needed for pain"
    order = MedicationOrder(sig, "500 mg")
    default = calculate_daily_dosage(order, extract(sig))
    opted = calculate_daily_dosage(order, extract(sig), prn_min_zero=True)
    assert values(default) == [(2000, 4000, "mg")]
    assert values(opted) == [(0, 4000, "mg")]


def test_outcome_exclusivity():
    with pytest.raises(ValueError):
        DosageOutcome(None, None)
    with pytest.raises(ValueError):
        IngredientDose(F(2), F(1), "mg")
    with pytest.raises(ValueError):
        NormalizedDE(F(2), F(1), False, None, F(1), F(1), F(1))


strengths = st.sampled_from([F(1), F(5), F(10), F(25), F(500), F(15, 2)])


@settings(max_examples=150)
@given(st.randoms(use_true_random=False), strengths)
def test_corner_oracle(rng, s):
    sig, da, af = corner_sig(rng)
    lo, hi = corner_oracle(da, af, s)
    assert values(daily_dosage(sig, strength_text([s]))) == [(lo, hi, "mg")]


@given(st.randoms(use_true_random=False), strengths, st.sampled_from([F(2), F(10), F(1, 2)]))
def test_strength_linearity(rng, s, k):
    sig = corner_sig(rng)[0]
    base = daily_dosage(sig, strength_text([s]))
    scaled = daily_dosage(sig, strength_text([s * k]))
    assert base.is_null == scaled.is_null
    if not base.is_null:
        assert values(scaled) == [(lo * k, hi * k, u) for lo, hi, u in values(base)]


@given(st.randoms(use_true_random=False), strengths)
def test_weekly_consistency(rng, s):
    sig, n = weekly_sig(rng)
    assert values(daily_dosage(sig, strength_text([s]))) == [(n * s / 7, n * s / 7, "mg")]


@given(st.randoms(use_true_random=False), strengths)
def test_additivity(rng, s):
    both, one, two = additive_sig(rng)
    st_text = strength_text([s])
    (a_lo, a_hi, _), = values(daily_dosage(one, st_text))
    (b_lo, b_hi, _), = values(daily_dosage(two, st_text))
    assert values(daily_dosage(both, st_text)) == [(a_lo + b_lo, a_hi + b_hi, "mg")]


@given(st.randoms(use_true_random=False), strengths)
def test_duplicate_idempotence(rng, s):
    sig = corner_sig(rng)[0]
    base = daily_dosage(sig, strength_text([s]))
    doubled = daily_dosage(f"{sig}. {sig}", strength_text([s]))
    assert base.value == doubled.value and base.null_reason == doubled.null_reason
