"""Normalization of dosage expressions and the daily dosage calculation.

All arithmetic is exact (:class:`fractions.Fraction`). Ranges propagate by
corner evaluation: both factors are non-negative, so ``min = da_min *
af_min`` and ``max = da_max * af_max``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .extraction import CompoundEntity, ExtractionResult, time_slot
from .lexicon import (
    EntityType,
    FormNorm,
    FrequencyNorm,
    Lexicon,
    NumericNorm,
    RouteNorm,
    UnitNorm,
    default_lexicon,
)
from .medorder import MedicationOrder, StrengthUnparseable, format_amount, parse_strength
from .tokenize import tokenize

WEEKLY = Fraction(1, 7)


class ReasonCode(str, Enum):
    NEED_MORE_INFO_UNINFORMATIVE = "NeedMoreInfo_Uninformative"
    NEED_MORE_INFO_MISSING_FREQUENCY = "NeedMoreInfo_MissingFrequency"
    NEED_MORE_INFO_MISSING_DOSE = "NeedMoreInfo_MissingDose"
    NEED_MORE_INFO_CONFLICTING = "NeedMoreInfo_Conflicting"
    VARIABLE_DOSE_OVER_DAYS = "VariableDoseOverDays"
    NOT_MEANINGFUL_NON_ROUTINE = "NotMeaningful_NonRoutine"
    NOT_MEANINGFUL_ONE_TIME = "NotMeaningful_OneTime"
    SUB_WEEKLY_FREQUENCY = "SubWeeklyFrequency"
    UNQUANTIFIABLE_FORM = "UnquantifiableForm"
    STRENGTH_UNAVAILABLE = "StrengthUnavailable"
    PARSE_FAILURE = "ParseFailure"


@dataclass(frozen=True)
class NormalizedDE:
    da_min: Fraction
    da_max: Fraction
    da_is_unit_based: bool
    da_unit: str | None
    af_per_day_min: Fraction
    af_per_day_max: Fraction
    period_days: Fraction
    # Raw NumericalValue of the DA, before any unit scaling.
    nv_min: Fraction = Fraction(1)
    nv_max: Fraction = Fraction(1)
    da_form: str | None = None
    da_route: str | None = None
    time_slot: str | None = None
    # Text between this DE and the previous one contains "and".
    joined_by_and: bool = False

    def __post_init__(self):
        if not (0 <= self.da_min <= self.da_max and 0 <= self.af_per_day_min <= self.af_per_day_max):
            raise ValueError("normalized DE ranges out of order")
        if self.period_days <= 0:
            raise ValueError("period_days must be positive")

    @property
    def per_day(self) -> tuple[Fraction, Fraction]:
        return self.da_min * self.af_per_day_min, self.da_max * self.af_per_day_max

    def same_value(self, other: "NormalizedDE") -> bool:
        return (self.da_min, self.da_max, self.da_is_unit_based, self.da_unit,
                self.af_per_day_min, self.af_per_day_max) == (
            other.da_min, other.da_max, other.da_is_unit_based, other.da_unit,
            other.af_per_day_min, other.af_per_day_max)


@dataclass(frozen=True)
class IngredientDose:
    min_per_day: Fraction
    max_per_day: Fraction
    unit: str

    def __post_init__(self):
        if not 0 <= self.min_per_day <= self.max_per_day:
            raise ValueError(f"daily dosage range out of order: {self.min_per_day}..{self.max_per_day}")

    def __str__(self) -> str:
        if self.min_per_day == self.max_per_day:
            return f"{format_amount(self.max_per_day)} {self.unit}/day"
        return f"{format_amount(self.min_per_day)}-{format_amount(self.max_per_day)} {self.unit}/day"


@dataclass(frozen=True)
class DailyDosage:
    per_ingredient: tuple[IngredientDose, ...]

    def __str__(self) -> str:
        return "; ".join(str(d) for d in self.per_ingredient)


@dataclass(frozen=True)
class DosageOutcome:
    value: DailyDosage | None = None
    null_reason: ReasonCode | None = None
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.value is None) == (self.null_reason is None):
            raise ValueError("exactly one of value and null_reason must be set")

    @property
    def is_null(self) -> bool:
        return self.value is None

    @classmethod
    def null(cls, reason: ReasonCode, diagnostics: Sequence[str] = ()) -> "DosageOutcome":
        return cls(None, reason, tuple(diagnostics))


class DosageConflict(Exception):
    """Multiple dosage expressions that can be neither added nor deduplicated."""


# ---------------------------------------------------------------------------
# normalization

def _frequency(af: CompoundEntity):
    freqs = [e for e in af.basics if e.entity_type is EntityType.FREQUENCY]
    # Trailing time-of-day words qualify the main frequency ("daily at bedtime").
    main = next((f for f in freqs if time_slot(f.text) is None), freqs[0])
    slot = next((time_slot(f.text) for f in freqs if time_slot(f.text)), None)
    return main, slot


def normalize_de(de: CompoundEntity) -> NormalizedDE:
    """Turn a DE's basic entities into per-administration and per-day numbers."""
    da, af = de.da, de.af
    nv = da.first(EntityType.NUMERICAL_VALUE).normalization
    assert isinstance(nv, NumericNorm)
    da_min, da_max = nv.value_min, nv.value_max
    unit = form = route = None
    if da.unit_based:
        u = da.first(EntityType.UNITS).normalization
        assert isinstance(u, UnitNorm)
        da_min, da_max = da_min * u.scale_to_canonical, da_max * u.scale_to_canonical
        unit = u.canonical_unit
    f = da.first(EntityType.FORM)
    if f is not None:
        form = f.normalization.canonical_form
    r = da.first(EntityType.ROUTE)
    if r is not None:
        route = r.normalization.canonical_route

    freq_ent, slot = _frequency(af)
    freq: FrequencyNorm = freq_ent.normalization
    count_min = count_max = Fraction(1)
    mult = Fraction(1)
    for ent in af.basics:
        if ent.entity_type is EntityType.NUMERICAL_VALUE:
            count_min, count_max = ent.normalization.value_min, ent.normalization.value_max
        elif ent.entity_type is EntityType.FREQUENCY_MOD:
            mult *= ent.normalization.multiplier
    base = freq.implicit_count * mult
    return NormalizedDE(
        da_min=da_min,
        da_max=da_max,
        da_is_unit_based=da.unit_based,
        da_unit=unit,
        af_per_day_min=count_min * base / freq.period_max,
        af_per_day_max=count_max * base / freq.period_days,
        period_days=freq.period_days,
        nv_min=nv.value_min,
        nv_max=nv.value_max,
        da_form=form,
        da_route=route,
        time_slot=slot,
    )


def _af_per_day(af: CompoundEntity) -> tuple[Fraction, Fraction]:
    """Per-day rate of a stand-alone AF, read as if its dose were one."""
    freq_ent, _ = _frequency(af)
    freq: FrequencyNorm = freq_ent.normalization
    lo = hi = freq.implicit_count
    for ent in af.basics:
        if ent.entity_type is EntityType.NUMERICAL_VALUE:
            lo, hi = lo * ent.normalization.value_min, hi * ent.normalization.value_max
        elif ent.entity_type is EntityType.FREQUENCY_MOD:
            lo, hi = lo * ent.normalization.multiplier, hi * ent.normalization.multiplier
    return lo / freq.period_max, hi / freq.period_days


def combine_des(ndes: Sequence[NormalizedDE]) -> tuple[Fraction, Fraction]:
    """Total per-day quantity over several DEs, in forms or in the DA unit.

    Complementary DEs (distinct time-of-day slots, or joined by "and") are
    added; DEs with equal values are duplicates and count once. Anything
    else raises :class:`DosageConflict`.
    """
    if not ndes:
        raise ValueError("combine_des needs at least one dosage expression")
    kinds = {(n.da_is_unit_based, n.da_unit) for n in ndes}
    if len(kinds) > 1:
        raise DosageConflict("dosage expressions mix incompatible quantities")
    if len(ndes) == 1:
        return ndes[0].per_day
    slots = [n.time_slot for n in ndes]
    distinct_slots = None not in slots and len(set(slots)) == len(slots)
    if distinct_slots or all(n.joined_by_and for n in ndes[1:]):
        return sum((n.per_day[0] for n in ndes), Fraction(0)), sum((n.per_day[1] for n in ndes), Fraction(0))
    if all(ndes[0].same_value(n) for n in ndes[1:]):
        return ndes[0].per_day
    raise DosageConflict("dosage expressions disagree")


# ---------------------------------------------------------------------------
# null-reason markers

_ONE_TIME_RE = re.compile(
    r"\bone[\s-]?time\s+(?:only|dose)\b|\bone-time\b|\bonce\s+only\b|\bsingle\s+dose\b"
    r"|\bfor\s+(?:1|one)\s+dose\b|\bx\s*1\s+dose\b",
    re.IGNORECASE,
)
_NON_ROUTINE_RE = re.compile(
    r"\bprior\s+to\s+(?!(?:each\s+|a\s+)?(?:meals?|breakfast|lunch|dinner|supper|bed|bedtime|eating|food)\b)"
    r"|\bbefore\s+(?:the\s+|a\s+|your\s+)?(?:procedure|surgery|sexual|intercourse|sex|sexual\s+activity"
    r"|dental|mri|ct|scan|flight|travel|appointment|exam|colonoscopy|dialysis)\b"
    r"|\b(?:at|with)\s+(?:the\s+)?(?:first\s+sign\s+of\s+|)onset\b|\bonset\s+of\b",
    re.IGNORECASE,
)
_WEEKDAY = r"(?:mon(?:day)?|tue(?:s|sday)?|wed(?:s|nesday)?|thu(?:r|rs|rsday)?|fri(?:day)?|sat(?:urday)?|sun(?:day)?)"
_VARIABLE_RE = re.compile(
    r"\bdays?\s*\d|\bweeks?\s*\d|\bweek\s+(?:one|two|three|four|five|six)\b"
    rf"|\b{_WEEKDAY}(?:\s*[-/,]\s*{_WEEKDAY})+\b"
    r"|\balternat(?:e|es|ing)\b|\btaper",
    re.IGNORECASE,
)
_PRN_RE = re.compile(r"\bprn\b|\bp\.r\.n\b|\bas\s+needed\b", re.IGNORECASE)
_UNQUANTIFIABLE = frozenset({"topical", "ophthalmic", "cream", "gel", "ointment", "lotion", "foam", "paste",
                             "shampoo", "application"})


def _marker_reason(sig: str) -> ReasonCode | None:
    if _ONE_TIME_RE.search(sig):
        return ReasonCode.NOT_MEANINGFUL_ONE_TIME
    if _NON_ROUTINE_RE.search(sig):
        return ReasonCode.NOT_MEANINGFUL_NON_ROUTINE
    if _VARIABLE_RE.search(sig):
        return ReasonCode.VARIABLE_DOSE_OVER_DAYS
    return None


def _order_words(order: MedicationOrder, lexicon: Lexicon) -> set[str]:
    words: set[str] = set()
    for text in (order.route, order.form):
        for tok in tokenize(text):
            words.add(tok.key)
        entry = lexicon.get(text) if text.strip() else None
        if entry is not None and isinstance(entry.normalization, (RouteNorm, FormNorm)):
            n = entry.normalization
            words.add(n.canonical_route if isinstance(n, RouteNorm) else n.canonical_form)
    # plural forms in structured fields ("creams", "drops") and ophthalmic solutions
    words |= {w.rstrip("s") for w in words}
    if "eye" in words or "ophth" in words:
        words.add("ophthalmic")
    return words


def _unquantifiable(order_words: set[str], ndes: Sequence[NormalizedDE]) -> bool:
    if any(n.da_is_unit_based for n in ndes):
        return False
    if order_words & _UNQUANTIFIABLE:
        return True
    return any({n.da_form, n.da_route} & _UNQUANTIFIABLE for n in ndes)


def _fallback_form(order: MedicationOrder, ndes: Sequence[NormalizedDE], lexicon: Lexicon) -> str:
    for n in ndes:
        if n.da_form:
            return n.da_form
    entry = lexicon.get(order.form, EntityType.FORM) if order.form.strip() else None
    if entry is not None:
        return entry.normalization.canonical_form
    return order.form.strip().lower() or "dose"


def _joined_by_and(sig: str, prev: CompoundEntity, cur: CompoundEntity) -> bool:
    return any(t.key in ("and", "&", "plus") for t in tokenize(sig[prev.span.end:cur.span.start]))


def _orphan_af_conflicts(extraction: ExtractionResult, ndes: Sequence[NormalizedDE]) -> bool:
    # A frequency with no dose of its own reads as "one dose at that rate"; it is
    # a restatement only when some DE gives exactly one unit at the same rate.
    for af in extraction.unpaired_afs:
        rate = _af_per_day(af)
        if not any((n.af_per_day_min, n.af_per_day_max) == rate and (n.nv_min, n.nv_max) == (1, 1) for n in ndes):
            return True
    return False


# ---------------------------------------------------------------------------
# calculation

def calculate_daily_dosage(
    order: MedicationOrder,
    extraction: ExtractionResult,
    lexicon: Lexicon | None = None,
    *,
    prn_min_zero: bool = False,
) -> DosageOutcome:
    """Daily dosage per ingredient for ``order``, or a null with its reason.

    Null reasons are tried from most to least specific and the first one
    that applies wins. With ``prn_min_zero`` an as-needed Sig reports a
    minimum of zero.
    """
    lexicon = lexicon or default_lexicon()
    sig = order.sig
    diags: list[str] = []
    marker = _marker_reason(sig)
    order_words = _order_words(order, lexicon)

    if not extraction.des:
        if marker is not None:
            return DosageOutcome.null(marker, diags)
        sig_words = {e.normalization.canonical_route for e in extraction.basics
                     if isinstance(e.normalization, RouteNorm)}
        sig_words |= {e.normalization.canonical_form for e in extraction.basics
                      if isinstance(e.normalization, FormNorm)}
        if extraction.afs and not extraction.das and (order_words | sig_words) & _UNQUANTIFIABLE:
            return DosageOutcome.null(ReasonCode.UNQUANTIFIABLE_FORM, diags)
        if extraction.das and not extraction.afs:
            diags.append("dose without frequency: " + ", ".join(repr(d.text) for d in extraction.das))
            return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_MISSING_FREQUENCY, diags)
        if extraction.afs and not extraction.das:
            diags.append("frequency without dose: " + ", ".join(repr(a.text) for a in extraction.afs))
            return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_MISSING_DOSE, diags)
        if extraction.das and extraction.afs:
            diags.append("frequency precedes dose; no dosage expression formed")
            return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_CONFLICTING, diags)
        return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_UNINFORMATIVE, diags)

    if marker is not None:
        return DosageOutcome.null(marker, diags)

    ndes = []
    for idx, de in enumerate(extraction.des):
        nde = normalize_de(de)
        if idx and _joined_by_and(sig, extraction.des[idx - 1], de):
            nde = replace(nde, joined_by_and=True)
        ndes.append(nde)
        if de.duration is not None:
            diags.append(f"duration: {de.duration.text!r}")

    if any(n.af_per_day_max < WEEKLY for n in ndes):
        return DosageOutcome.null(ReasonCode.SUB_WEEKLY_FREQUENCY, diags)
    if _unquantifiable(order_words, ndes):
        return DosageOutcome.null(ReasonCode.UNQUANTIFIABLE_FORM, diags)

    if extraction.unpaired_das:
        diags.append("dose outside any dosage expression: " + ", ".join(repr(d.text) for d in extraction.unpaired_das))
        return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_CONFLICTING, diags)
    if _orphan_af_conflicts(extraction, ndes):
        diags.append("frequency outside any dosage expression disagrees with the dose")
        return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_CONFLICTING, diags)
    try:
        total_min, total_max = combine_des(ndes)
    except DosageConflict as exc:
        diags.append(str(exc))
        return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_CONFLICTING, diags)

    unit_based = ndes[0].da_is_unit_based
    strength = None
    if not unit_based and order.strength_text.strip():
        try:
            strength = parse_strength(order.strength_text, lexicon)
        except StrengthUnparseable as exc:
            diags.append(f"strength: {exc}")
            return DosageOutcome.null(ReasonCode.STRENGTH_UNAVAILABLE, diags)

    for cap in extraction.caps:
        limit = _cap_limit(cap, unit_based, ndes[0].da_unit, strength)
        if limit is None:
            diags.append(f"cap not applied: {cap.span.text!r}")
            continue
        if limit < total_min:
            diags.append(f"cap {cap.span.text!r} is below the minimum dose")
            return DosageOutcome.null(ReasonCode.NEED_MORE_INFO_CONFLICTING, diags)
        if limit < total_max:
            diags.append(f"cap applied: {cap.span.text!r}")
            total_max = limit

    if _PRN_RE.search(sig):
        diags.append("prn: as-needed dosing")
        if prn_min_zero:
            total_min = Fraction(0)

    if unit_based:
        unit = ndes[0].da_unit
        if order.strength_text.strip():
            try:
                s_units = {i.unit for i in parse_strength(order.strength_text, lexicon).ingredients}
                if s_units != {unit}:
                    diags.append(f"dose unit {unit} differs from strength unit {'/'.join(sorted(s_units))}")
            except StrengthUnparseable:
                pass
        return DosageOutcome(DailyDosage((IngredientDose(total_min, total_max, unit),)), None, tuple(diags))

    if strength is None:
        form = _fallback_form(order, ndes, lexicon)
        diags.append("no strength: reporting forms per day")
        return DosageOutcome(DailyDosage((IngredientDose(total_min, total_max, f"form:{form}"),)), None, tuple(diags))

    doses = []
    for ing in strength.ingredients:
        if ing.denominator and ing.denominator[0].isdigit():
            diags.append(f"strength given per {ing.denominator}; applied per administered form")
        doses.append(IngredientDose(total_min * ing.amount, total_max * ing.amount, ing.unit))
    return DosageOutcome(DailyDosage(tuple(doses)), None, tuple(diags))


def _cap_limit(cap, unit_based: bool, da_unit: str | None, strength) -> Fraction | None:
    """Cap expressed in the same quantity as the combined total, if convertible."""
    if cap.unit is None:
        return None if unit_based else cap.amount
    if unit_based:
        return cap.amount if cap.unit == da_unit else None
    if strength is not None and len(strength.ingredients) == 1 and strength.ingredients[0].unit == cap.unit:
        return cap.amount / strength.ingredients[0].amount
    return None
