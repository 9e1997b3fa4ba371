from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sigdose.medorder import (
    IngredientStrength,
    Strength,
    StrengthUnparseable,
    UnknownUnit,
    canonicalize_unit,
    format_amount,
    format_strength,
    parse_strength,
)


def amounts(s):
    return [(i.amount, i.unit, i.denominator) for i in s.ingredients]


@pytest.mark.parametrize(
    "text, expected",
    [
        ("50mg", [(50, "mg", None)]),
        ("7.5 mg", [(Fraction(15, 2), "mg", None)]),
        ("250-50 mcg/dose", [(250, "mcg", "dose"), (50, "mcg", "dose")]),
        ("300 MG-30 MG", [(300, "mg", None), (30, "mg", None)]),
        ("300 MG-30 MG TABLET", [(300, "mg", None), (30, "mg", None)]),
        ("1 g", [(1000, "mg", None)]),
        ("100 mg/5 ml", [(100, "mg", "5 ml")]),
    ],
)
def test_parse_strength(text, expected):
    assert amounts(parse_strength(text)) == expected


@pytest.mark.parametrize("text", ["", "   ", "mg", "50", "abc-def", "5 parsecs", "0 mg"])
def test_unparseable(text):
    with pytest.raises(StrengthUnparseable):
        parse_strength(text)


def test_canonicalize_unit():
    assert canonicalize_unit(Fraction(2), "teaspoon") == (10, "ml")
    assert canonicalize_unit(Fraction(1), "tbsp") == (15, "ml")
    with pytest.raises(UnknownUnit):
        canonicalize_unit(Fraction(1), "furlong")


def test_format_amount():
    assert format_amount(Fraction(15, 2)) == "7.5"
    assert format_amount(Fraction(1, 3)) == "1/3"
    assert format_amount(Fraction(200)) == "200"


pos = st.fractions(min_value=Fraction(1, 8), max_value=2000, max_denominator=8)
units = st.sampled_from(["mg", "mcg", "ml", "unit", "meq"])
dens = st.sampled_from([None, "dose", "ml", "5 ml", "actuation"])


@st.composite
def strengths(draw):
    n = draw(st.integers(1, 3))
    den = draw(dens)
    return Strength(tuple(IngredientStrength(draw(pos), draw(units), den) for _ in range(n)))


@given(strengths())
def test_format_parse_round_trip(s):
    assert parse_strength(format_strength(s)) == s


@given(strengths(), st.sampled_from([Fraction(2), Fraction(10), Fraction(1, 2)]))
def test_scaling_is_multiplicative(s, k):
    scaled = parse_strength(format_strength(s.scaled(k)))
    assert [i.amount for i in scaled.ingredients] == [i.amount * k for i in s.ingredients]
