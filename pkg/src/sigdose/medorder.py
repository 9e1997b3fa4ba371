"""Structured medication order fields and strength parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .lexicon import EntityType, Lexicon, UnitNorm, default_lexicon, parse_number


class StrengthUnparseable(ValueError):
    pass


class UnknownUnit(ValueError):
    pass


@dataclass(frozen=True)
class MedicationOrder:
    sig: str
    strength_text: str = ""
    route: str = ""
    form: str = ""
    order_id: str = ""


@dataclass(frozen=True)
class IngredientStrength:
    amount: Fraction
    unit: str
    denominator: str | None = None

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError("ingredient amount must be positive")


@dataclass(frozen=True)
class Strength:
    ingredients: tuple[IngredientStrength, ...]

    def __post_init__(self):
        if not self.ingredients:
            raise ValueError("a strength needs at least one ingredient")

    def __len__(self) -> int:
        return len(self.ingredients)

    def scaled(self, k: Fraction) -> "Strength":
        return Strength(tuple(IngredientStrength(i.amount * k, i.unit, i.denominator) for i in self.ingredients))


def canonicalize_unit(amount: Fraction, unit: str, lexicon: Lexicon | None = None) -> tuple[Fraction, str]:
    """Scale ``amount`` from ``unit`` into the unit's canonical form (g -> mg, tsp -> ml)."""
    entry = (lexicon or default_lexicon()).get(unit, EntityType.UNITS)
    if entry is None:
        raise UnknownUnit(unit)
    norm: UnitNorm = entry.normalization
    return Fraction(amount) * norm.scale_to_canonical, norm.canonical_unit


_NUM = r"\d+(?:\.\d+)?(?:/\d+(?:\.\d+)?)?|\.\d+"
_UNIT = r"[^\W\d_][^\W_]*"
_DENOM = rf"/\s*(?P<den>(?:(?:{_NUM})\s*)?{_UNIT})"
_ITEM_RE = re.compile(rf"^\s*(?P<num>{_NUM})\s*(?P<unit>{_UNIT})?\s*(?:{_DENOM})?\s*")


def _split_items(text: str) -> list[str]:
    # Hyphens separate ingredients; fractions and decimals never contain one.
    return [part for part in re.split(r"\s*-\s*", text.strip())]


def parse_strength(strength_text: str, lexicon: Lexicon | None = None) -> Strength:
    """Parse a strength field into per-ingredient amounts, order preserved.

    Accepted shapes: ``50mg``, ``250-50 mcg/dose`` (shared unit),
    ``300 MG-30 MG`` (unit per ingredient), each with an optional
    ``/denominator``. A denominator written only once at the end applies to
    every ingredient. Trailing words after the last amount ("TABLET") are
    ignored.
    """
    lexicon = lexicon or default_lexicon()
    text = strength_text.strip()
    if not text:
        raise StrengthUnparseable("empty strength")
    raw: list[tuple[Fraction, str | None, str | None]] = []
    for idx, part in enumerate(_split_items(text)):
        m = _ITEM_RE.match(part)
        if not m:
            raise StrengthUnparseable(f"cannot read {strength_text!r}")
        trailing = part[m.end():].strip()
        if trailing and (idx != len(_split_items(text)) - 1 or not re.fullmatch(r"[^\W\d_]+(?:\s+[^\W\d_]+)*", trailing)):
            raise StrengthUnparseable(f"cannot read {strength_text!r}")
        amount = parse_number(m.group("num"))
        if amount is None or amount <= 0:
            raise StrengthUnparseable(f"bad amount in {strength_text!r}")
        den = re.sub(r"\s+", " ", m.group("den").lower()) if m.group("den") else None
        raw.append((amount, m.group("unit"), den))

    last_unit = raw[-1][1]
    if last_unit is None:
        raise StrengthUnparseable(f"no unit in {strength_text!r}")
    shared_den = raw[-1][2] if all(d is None for _, _, d in raw[:-1]) else None
    ingredients = []
    for amount, unit, den in raw:
        try:
            value, canon = canonicalize_unit(amount, unit or last_unit, lexicon)
        except UnknownUnit as exc:
            raise StrengthUnparseable(f"unknown unit {exc} in {strength_text!r}") from None
        ingredients.append(IngredientStrength(value, canon, den if den is not None else shared_den))
    return Strength(tuple(ingredients))


def format_amount(value: Fraction) -> str:
    """Exact decimal text when one exists, otherwise ``p/q``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    d = value.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{value.numerator}/{value.denominator}"
    places = max(twos, fives)
    scaled = value * 10**places
    return f"{scaled.numerator // 10**places}.{scaled.numerator % 10**places:0{places}d}"


def format_strength(strength: Strength) -> str:
    items = strength.ingredients
    dens = {i.denominator for i in items}
    shared_den = dens.pop() if len(dens) == 1 else None
    units = {i.unit for i in items}
    parts = []
    for idx, ing in enumerate(items):
        text = format_amount(ing.amount)
        own_den = shared_den is None and ing.denominator is not None
        if len(units) > 1 or own_den or idx == len(items) - 1:
            text += f" {ing.unit}"
        if own_den:
            text += f"/{ing.denominator}"
        parts.append(text)
    out = "-".join(parts)
    if shared_den is not None:
        out += f"/{shared_den}"
    return out
