"""Rule-based entity extraction over a Sig.

Basic entities come from lexicon lookup plus a few regular patterns that a
finite lexicon cannot enumerate (hour/day intervals, clock times). Compound
entities are assembled bottom-up: DosagePerAdministration (DA) and
AdministrationFrequency (AF) from adjacent basic entities, then
DosageExpression (DE) from a DA and the AF that follows it.

An external NER system can stand in for the rule-based compound step; see
:func:`external_entities_to_compound`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .lexicon import (
    EntityType,
    FormNorm,
    FrequencyNorm,
    Lexicon,
    NumericNorm,
    Normalization,
    UnitNorm,
    default_lexicon,
    lookup_longest,
    parse_number,
    parse_numeric_token,
)
from .tokenize import Token, token_key, tokenize

__all__ = [
    "Span",
    "BasicEntity",
    "CompoundKind",
    "CompoundEntity",
    "Cap",
    "ExtractionResult",
    "ExtractorContractError",
    "tokenize",
    "extract_basic",
    "assemble_da",
    "assemble_af",
    "pair_des",
    "extract",
    "external_entities_to_compound",
    "extract_external",
    "time_slot",
]

MAX_GAP = 2
BOUNDARY_TOKENS = frozenset({".", ";", "and", "then", "&"})
_GAP_IGNORED = frozenset({"(", ")", ","})
_MULTIPLICATIVE = frozenset({"once", "twice", "thrice"})
_TIMES_WORDS = frozenset({"times", "time", "x"})
_RANGE_JOINERS = frozenset({"to", "or", "-"})
# Filler allowed between an AF and a trailing time-of-day word ("daily at bedtime").
_SLOT_FILLER = frozenset({"at", "in", "the", "(", ")", ",", "and", "&", "before", "after", "with"})

_TIME_SLOTS = {
    "am": "morning", "qam": "morning", "morning": "morning", "mornings": "morning",
    "noon": "noon", "midday": "noon", "lunch": "noon",
    "pm": "evening", "qpm": "evening", "evening": "evening", "evenings": "evening",
    "night": "bedtime", "nightly": "bedtime", "bedtime": "bedtime", "hs": "bedtime", "qhs": "bedtime",
}


def time_slot(text: str) -> str | None:
    """Time-of-day slot named by a frequency phrase, if any ("8 pm" -> evening)."""
    toks = tokenize(text)
    return _TIME_SLOTS.get(toks[-1].key) if toks else None


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    text: str

    @classmethod
    def of(cls, sig: str, start: int, end: int) -> "Span":
        if not 0 <= start < end <= len(sig):
            raise ValueError(f"bad span [{start}, {end}) over text of length {len(sig)}")
        return cls(start, end, sig[start:end])

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, start: int, end: int) -> bool:
        return self.start < end and start < self.end


@dataclass(frozen=True)
class BasicEntity:
    span: Span
    entity_type: EntityType
    normalization: Normalization

    @property
    def text(self) -> str:
        return self.span.text


class CompoundKind(str, Enum):
    DA = "DosagePerAdministration"
    AF = "AdministrationFrequency"
    DE = "DosageExpression"


@dataclass(frozen=True)
class CompoundEntity:
    kind: CompoundKind
    span: Span
    parts: tuple
    # DA only: quantity is an amount in a unit ("20 mg") rather than a count of forms.
    unit_based: bool = False
    # DE only: attached duration phrase ("for 7 days"); informational.
    duration: Span | None = None

    @property
    def text(self) -> str:
        return self.span.text

    @property
    def basics(self) -> tuple[BasicEntity, ...]:
        out: list[BasicEntity] = []
        for part in self.parts:
            if isinstance(part, BasicEntity):
                out.append(part)
            else:
                out.extend(part.basics)
        return tuple(out)

    def first(self, *types: EntityType) -> BasicEntity | None:
        for ent in self.basics:
            if ent.entity_type in types:
                return ent
        return None

    @property
    def da(self) -> "CompoundEntity":
        assert self.kind is CompoundKind.DE
        return self.parts[0]

    @property
    def af(self) -> "CompoundEntity":
        assert self.kind is CompoundKind.DE
        return self.parts[1]


@dataclass(frozen=True)
class Cap:
    """A daily ceiling such as "max = 6 tabs/day" or "do not exceed 30 mg per day"."""

    span: Span
    amount: Fraction
    # Canonical unit ("mg") or form ("tablet"); None when the cap names neither.
    unit: str | None = None
    form: str | None = None


@dataclass(frozen=True)
class ExtractionResult:
    sig: str
    basics: tuple[BasicEntity, ...] = ()
    das: tuple[CompoundEntity, ...] = ()
    afs: tuple[CompoundEntity, ...] = ()
    des: tuple[CompoundEntity, ...] = ()
    unpaired_das: tuple[CompoundEntity, ...] = ()
    unpaired_afs: tuple[CompoundEntity, ...] = ()
    caps: tuple[Cap, ...] = ()
    durations: tuple[Span, ...] = ()

    def spans(self) -> Iterable[Span]:
        for ent in self.basics:
            yield ent.span
        for group in (self.das, self.afs, self.des):
            for comp in group:
                yield comp.span
        for cap in self.caps:
            yield cap.span
        yield from self.durations


class ExtractorContractError(ValueError):
    """External entities violate the label/span contract."""


# ---------------------------------------------------------------------------
# regular patterns

_NUM_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6, "seven": 7, "eight": 8,
    "nine": 9, "ten": 10, "eleven": 11, "twelve": 12, "fourteen": 14, "sixteen": 16,
    "eighteen": 18, "twenty": 20, "twenty-four": 24, "thirty": 30, "forty-eight": 48,
    "seventy-two": 72,
}
_N = r"(?:\d+(?:\.\d+)?|" + "|".join(sorted(_NUM_WORDS, key=len, reverse=True)) + r")"

_INTERVAL_UNITS = [
    (r"hours?|hrs?|h", Fraction(1, 24)),
    (r"days?|d", Fraction(1)),
    (r"weeks?|wks?|w", Fraction(7)),
    (r"months?|mos?", Fraction(30)),
]
_INTERVAL_RE = re.compile(
    rf"\b(?:every|each|q)\s*(?P<lo>{_N})(?:\s*(?:-|to|or)\s*(?P<hi>{_N}))?\s*"
    rf"(?P<unit>{'|'.join(u for u, _ in _INTERVAL_UNITS)})\b",
    re.IGNORECASE,
)
_CLOCK_RE = re.compile(r"\b\d{1,2}(?::\d{2})?\s*(?:am|pm|a\.m\.?|p\.m\.?)(?![a-z])", re.IGNORECASE)
_DURATION_RE = re.compile(
    rf"\b(?:for|x)\s*(?:the\s+next\s+|a\s+total\s+of\s+)?{_N}(?:\s*(?:-|to)\s*{_N})?\s*"
    rf"(?:more\s+)?(?:days?|d|weeks?|wks?|months?|doses?)\b",
    re.IGNORECASE,
)
_CAP_RE = re.compile(
    rf"\b(?:max(?:imum)?(?:\s+(?:daily\s+)?dose)?\s*(?:of|=|:|is)?"
    rf"|(?:do\s+not|don'?t|not\s+to)\s+exceed|no\s+more\s+than|up\s+to)\s*"
    rf"(?P<n>{_N})\s*(?P<what>[^\W\d_]+(?:\(s\))?)?\s*"
    rf"(?:/\s*|\b(?:per|a|in|each|every)\s+)(?:(?:1|one|a)\s+)?(?:day|24\s*(?:hours?|hrs?|h))\b",
    re.IGNORECASE,
)


def _num_value(text: str) -> Fraction | None:
    text = text.lower()
    if text in _NUM_WORDS:
        return Fraction(_NUM_WORDS[text])
    return parse_number(text)


def _interval_frequency(m: re.Match) -> FrequencyNorm | None:
    lo = _num_value(m.group("lo"))
    hi = _num_value(m.group("hi")) if m.group("hi") else lo
    unit = m.group("unit").lower()
    scale = next(s for pat, s in _INTERVAL_UNITS if re.fullmatch(pat, unit))
    if lo is None or hi is None or lo <= 0 or hi < lo:
        return None
    lo_days, hi_days = lo * scale, hi * scale
    return FrequencyNorm(lo_days, Fraction(1), hi_days if hi_days != lo_days else None)


def _parse_cap(sig: str, m: re.Match, lexicon: Lexicon) -> Cap | None:
    amount = _num_value(m.group("n"))
    if amount is None or amount <= 0:
        return None
    unit = form = None
    what = m.group("what")
    if what:
        entry = lexicon.get(what)
        if entry is not None and isinstance(entry.normalization, UnitNorm):
            amount *= entry.normalization.scale_to_canonical
            unit = entry.normalization.canonical_unit
        elif entry is not None and isinstance(entry.normalization, FormNorm):
            form = entry.normalization.canonical_form
    return Cap(Span.of(sig, m.start(), m.end()), amount, unit, form)


@dataclass
class _Claims:
    caps: list[Cap] = field(default_factory=list)
    durations: list[Span] = field(default_factory=list)
    frequencies: list[BasicEntity] = field(default_factory=list)
    regions: list[tuple[int, int]] = field(default_factory=list)

    def free(self, start: int, end: int) -> bool:
        return all(end <= s or e <= start for s, e in self.regions)


def _claim_patterns(sig: str, lexicon: Lexicon) -> _Claims:
    claims = _Claims()
    for m in _CAP_RE.finditer(sig):
        cap = _parse_cap(sig, m, lexicon)
        if cap is not None and claims.free(m.start(), m.end()):
            claims.caps.append(cap)
            claims.regions.append((m.start(), m.end()))
    for m in _DURATION_RE.finditer(sig):
        if claims.free(m.start(), m.end()):
            claims.durations.append(Span.of(sig, m.start(), m.end()))
            claims.regions.append((m.start(), m.end()))
    for m in _INTERVAL_RE.finditer(sig):
        norm = _interval_frequency(m)
        if norm is not None and claims.free(m.start(), m.end()):
            claims.frequencies.append(BasicEntity(Span.of(sig, m.start(), m.end()), EntityType.FREQUENCY, norm))
            claims.regions.append((m.start(), m.end()))
    for m in _CLOCK_RE.finditer(sig):
        if claims.free(m.start(), m.end()):
            norm = FrequencyNorm(Fraction(1), Fraction(1))
            claims.frequencies.append(BasicEntity(Span.of(sig, m.start(), m.end()), EntityType.FREQUENCY, norm))
            claims.regions.append((m.start(), m.end()))
    return claims


# ---------------------------------------------------------------------------
# basic entities

def _read_number(run: Sequence[Token], i: int, lexicon: Lexicon) -> tuple[NumericNorm, int] | None:
    """Single numeric reading at ``run[i]``: literal, lexicon word, or "(n)"."""
    parsed = parse_numeric_token(run[i].text)
    if parsed is not None:
        return NumericNorm(*parsed), i + 1
    match = lookup_longest(run, i, lexicon)
    if match is not None and match.entry.entity_type is EntityType.NUMERICAL_VALUE:
        return match.entry.normalization, i + match.length
    return None


def _read_numeric_entity(run: Sequence[Token], i: int, lexicon: Lexicon) -> tuple[NumericNorm, int] | None:
    first = _read_number(run, i, lexicon)
    if first is None:
        return None
    norm, j = first
    j, norm = _absorb_restatement(run, j, norm)
    # mixed number: "1 1/2"
    if (j < len(run) and norm.value_min == norm.value_max and norm.value_min.denominator == 1
            and run[j - 1].text.isdigit() and "/" in run[j].text):
        frac = parse_numeric_token(run[j].text)
        if frac and frac[0] == frac[1] and frac[0] < 1:
            total = norm.value_min + frac[0]
            norm, j = NumericNorm(total, total), j + 1
    # range: "one to two", "1 - 2", "2 or 3"
    if j + 1 < len(run) and run[j].text in _RANGE_JOINERS:
        second = _read_number(run, j + 1, lexicon)
        if second is not None and second[0].value_min >= norm.value_max:
            k, hi = _absorb_restatement(run, second[1], second[0])
            norm, j = NumericNorm(norm.value_min, hi.value_max), k
    return norm, j


def _absorb_restatement(run: Sequence[Token], j: int, norm: NumericNorm) -> tuple[int, NumericNorm]:
    if j < len(run) and run[j].text.startswith("("):
        restated = parse_numeric_token(run[j].text)
        if restated is not None:
            return j + 1, NumericNorm(*restated)
    return j, norm


def _runs(tokens: list[Token], claims: _Claims) -> list[list[Token]]:
    runs: list[list[Token]] = [[]]
    for tok in tokens:
        if claims.free(tok.start, tok.end):
            runs[-1].append(tok)
        elif runs[-1]:
            runs.append([])
    return [r for r in runs if r]


def _scan(sig: str, lexicon: Lexicon) -> tuple[list[BasicEntity], _Claims]:
    claims = _claim_patterns(sig, lexicon)
    found: list[BasicEntity] = list(claims.frequencies)
    for run in _runs(tokenize(sig), claims):
        i = 0
        while i < len(run):
            numeric = _read_numeric_entity(run, i, lexicon)
            if numeric is not None:
                norm, j = numeric
                found.append(BasicEntity(Span.of(sig, run[i].start, run[j - 1].end), EntityType.NUMERICAL_VALUE, norm))
                i = j
                continue
            match = lookup_longest(run, i, lexicon)
            if match is None:
                i += 1
                continue
            j = i + match.length
            entry = match.entry
            found.append(BasicEntity(Span.of(sig, run[i].start, run[j - 1].end), entry.entity_type, entry.normalization))
            i = j
    found.sort(key=lambda e: (e.span.start, e.span.end))
    return found, claims


def extract_basic(sig: str, lexicon: Lexicon | None = None) -> list[BasicEntity]:
    """Basic entities of ``sig`` in left-to-right order.

    Tokens inside cap ("max = 6 tabs/day") and duration ("for 7 days")
    phrases are not read as entities; those phrases are reported by
    :func:`extract` instead.
    """
    return _scan(sig, lexicon or default_lexicon())[0]


# ---------------------------------------------------------------------------
# compound entities

def _gap_tokens(sig: str, left: int, right: int) -> list[Token]:
    return tokenize(sig[left:right]) if right > left else []


def _adjacent(sig: str, a: BasicEntity | CompoundEntity, b: BasicEntity | CompoundEntity) -> bool:
    gap = _gap_tokens(sig, a.span.end, b.span.start)
    if any(t.text in BOUNDARY_TOKENS for t in gap):
        return False
    return sum(t.text not in _GAP_IGNORED for t in gap) <= MAX_GAP


def _nv_af_length(sig: str, basics: Sequence[BasicEntity], i: int) -> int:
    """Basics in an AF led by the NV at ``i``, or 0.

    Covers "twice daily", "3 times a day" and "3 times per day".
    """
    n = len(basics)
    if i + 1 >= n:
        return 0
    nv, nxt = basics[i], basics[i + 1]
    if not _adjacent(sig, nv, nxt):
        return 0
    timed = any(t.key in _TIMES_WORDS for t in _gap_tokens(sig, nv.span.end, nxt.span.start))
    if nxt.entity_type is EntityType.FREQUENCY:
        return 2 if timed or token_key(nv.text) in _MULTIPLICATIVE else 0
    if (nxt.entity_type is EntityType.FREQUENCY_MOD and i + 2 < n
            and basics[i + 2].entity_type is EntityType.FREQUENCY and _adjacent(sig, nxt, basics[i + 2])
            and (timed or token_key(nv.text) in _MULTIPLICATIVE)):
        return 3
    return 0


def _starts_af(sig: str, basics: Sequence[BasicEntity], i: int) -> bool:
    return _nv_af_length(sig, basics, i) > 0


def _compound(sig: str, kind: CompoundKind, parts: Sequence, **kw) -> CompoundEntity:
    return CompoundEntity(kind, Span.of(sig, parts[0].span.start, parts[-1].span.end), tuple(parts), **kw)


def _sorted(basics: Iterable[BasicEntity]) -> list[BasicEntity]:
    return sorted(basics, key=lambda e: (e.span.start, e.span.end))


def _closes_paren(sig: str, pos: int) -> bool:
    return re.match(r"\s*(?:total\s*)?\)", sig[pos:], re.IGNORECASE) is not None


def assemble_da(basics: Sequence[BasicEntity], sig: str) -> list[CompoundEntity]:
    """Greedy DA matching: ``NV + ?Form + ?Route`` or ``NV + Unit + ?Route``."""
    basics = _sorted(basics)
    das: list[CompoundEntity] = []
    i, n = 0, len(basics)
    while i < n:
        ent = basics[i]
        if ent.entity_type is not EntityType.NUMERICAL_VALUE or _starts_af(sig, basics, i):
            i += 1
            continue
        parts = [ent]
        unit_based = False
        k = i + 1
        if k < n and basics[k].entity_type in (EntityType.FORM, EntityType.UNITS) and _adjacent(sig, ent, basics[k]):
            unit_based = basics[k].entity_type is EntityType.UNITS
            parts.append(basics[k])
            k += 1
            # "1 tablet (25 mg)": the parenthesized amount restates the strength
            if (not unit_based and k + 1 < n
                    and basics[k].entity_type is EntityType.NUMERICAL_VALUE
                    and basics[k + 1].entity_type is EntityType.UNITS
                    and [t.text for t in _gap_tokens(sig, parts[-1].span.end, basics[k].span.start)] == ["("]
                    and _adjacent(sig, basics[k], basics[k + 1])
                    and _closes_paren(sig, basics[k + 1].span.end)):
                parts.extend(basics[k:k + 2])
                k += 2
        if k < n and basics[k].entity_type is EntityType.ROUTE and _adjacent(sig, parts[-1], basics[k]):
            parts.append(basics[k])
            k += 1
        das.append(_compound(sig, CompoundKind.DA, parts, unit_based=unit_based))
        i = k
    return das


def _absorb_slots(sig: str, basics: Sequence[BasicEntity], k: int, parts: list[BasicEntity]) -> int:
    """Extend a non-slot AF with trailing time-of-day words ("daily at bedtime")."""
    if time_slot(parts[-1].text) is not None:
        return k
    while k < len(basics) and basics[k].entity_type is EntityType.FREQUENCY and time_slot(basics[k].text):
        gap = _gap_tokens(sig, parts[-1].span.end, basics[k].span.start)
        if any(t.text not in _SLOT_FILLER for t in gap) or len(gap) > 4:
            break
        parts.append(basics[k])
        k += 1
    return k


def assemble_af(basics: Sequence[BasicEntity], sig: str) -> list[CompoundEntity]:
    """AF matching: ``?FrequencyMod + ?NumericalValue + Frequency``."""
    basics = _sorted(basics)
    afs: list[CompoundEntity] = []
    i, n = 0, len(basics)
    while i < n:
        ent = basics[i]
        parts: list[BasicEntity] | None = None
        if ent.entity_type is EntityType.FREQUENCY_MOD:
            j = i + 1
            if (j + 1 < n and basics[j].entity_type is EntityType.NUMERICAL_VALUE
                    and basics[j + 1].entity_type is EntityType.FREQUENCY
                    and _adjacent(sig, ent, basics[j]) and _adjacent(sig, basics[j], basics[j + 1])):
                parts = [ent, basics[j], basics[j + 1]]
            elif j < n and basics[j].entity_type is EntityType.FREQUENCY and _adjacent(sig, ent, basics[j]):
                parts = [ent, basics[j]]
        elif ent.entity_type is EntityType.NUMERICAL_VALUE and _starts_af(sig, basics, i):
            parts = list(basics[i:i + _nv_af_length(sig, basics, i)])
        elif ent.entity_type is EntityType.FREQUENCY:
            parts = [ent]
        if parts is None:
            i += 1
            continue
        k = _absorb_slots(sig, basics, i + len(parts), parts)
        afs.append(_compound(sig, CompoundKind.AF, parts))
        i = k
    return afs


def pair_des(
    das: Sequence[CompoundEntity], afs: Sequence[CompoundEntity], sig: str | None = None
) -> tuple[list[CompoundEntity], list[CompoundEntity], list[CompoundEntity]]:
    """Pair each DA with the nearest following AF that comes before the next DA.

    Returns ``(des, unpaired_das, unpaired_afs)``.
    """
    das = sorted(das, key=lambda c: c.span.start)
    afs = sorted(afs, key=lambda c: c.span.start)
    des: list[CompoundEntity] = []
    used: set[int] = set()
    unpaired_das: list[CompoundEntity] = []
    for idx, da in enumerate(das):
        limit = das[idx + 1].span.start if idx + 1 < len(das) else None
        partner = None
        for a_idx, af in enumerate(afs):
            if a_idx in used or af.span.start < da.span.end:
                continue
            if limit is not None and af.span.start >= limit:
                break
            partner = a_idx
            break
        if partner is None:
            unpaired_das.append(da)
            continue
        used.add(partner)
        af = afs[partner]
        span = Span.of(sig, da.span.start, af.span.end) if sig is not None else _joined_span(da, af)
        des.append(CompoundEntity(CompoundKind.DE, span, (da, af)))
    unpaired_afs = [af for a_idx, af in enumerate(afs) if a_idx not in used]
    return des, unpaired_das, unpaired_afs


def _joined_span(da: CompoundEntity, af: CompoundEntity) -> Span:
    # Without the sig the gap text is unknown; only adjacent spans can be joined exactly.
    if da.span.end == af.span.start:
        return Span(da.span.start, af.span.end, da.span.text + af.span.text)
    raise ValueError("pair_des needs the sig to build spans over non-adjacent DA/AF")


def _attach_durations(des: list[CompoundEntity], durations: Sequence[Span]) -> list[CompoundEntity]:
    if not des or not durations:
        return des
    out = list(des)
    for dur in durations:
        before = [i for i, de in enumerate(out) if de.span.end <= dur.start]
        idx = before[-1] if before else 0
        if out[idx].duration is None:
            de = out[idx]
            out[idx] = CompoundEntity(de.kind, de.span, de.parts, de.unit_based, dur)
    return out


def _result(sig: str, basics, das, afs, claims: _Claims) -> ExtractionResult:
    des, unpaired_das, unpaired_afs = pair_des(das, afs, sig)
    des = _attach_durations(des, claims.durations)
    return ExtractionResult(
        sig=sig,
        basics=tuple(basics),
        das=tuple(das),
        afs=tuple(afs),
        des=tuple(des),
        unpaired_das=tuple(unpaired_das),
        unpaired_afs=tuple(unpaired_afs),
        caps=tuple(claims.caps),
        durations=tuple(claims.durations),
    )


def extract(sig: str, lexicon: Lexicon | None = None) -> ExtractionResult:
    """Run the full rule-based extractor over ``sig``."""
    lexicon = lexicon or default_lexicon()
    basics, claims = _scan(sig, lexicon)
    return _result(sig, basics, assemble_da(basics, sig), assemble_af(basics, sig), claims)


# ---------------------------------------------------------------------------
# external extractor seam

EXTERNAL_LABELS = frozenset({"Dosage", "Strength", "Form", "Frequency", "Route", "Duration", "Drug"})


def _basics_within(sig: str, start: int, end: int, lexicon: Lexicon) -> list[BasicEntity]:
    """Re-run basic extraction inside ``sig[start:end]``, offsets relative to ``sig``."""
    inner, _ = _scan(sig[start:end], lexicon)
    return [BasicEntity(Span.of(sig, e.span.start + start, e.span.end + start), e.entity_type, e.normalization)
            for e in inner]


def _check_entities(sig: str, entities: Sequence[tuple[str, Span]]) -> list[tuple[str, Span]]:
    checked = []
    for label, span in entities:
        if label not in EXTERNAL_LABELS:
            raise ExtractorContractError(f"unknown entity label {label!r}")
        if not 0 <= span.start < span.end <= len(sig):
            raise ExtractorContractError(f"{label} span [{span.start}, {span.end}) outside sig")
        checked.append((label, Span.of(sig, span.start, span.end)))
    checked.sort(key=lambda e: (e[1].start, e[1].end))
    last_end: dict[str, int] = {}
    for label, span in checked:
        if span.start < last_end.get(label, -1):
            raise ExtractorContractError(f"overlapping {label} spans at {span.start}")
        last_end[label] = max(last_end.get(label, -1), span.end)
    return checked


def external_entities_to_compound(
    sig: str, entities: Sequence[tuple[str, Span]], lexicon: Lexicon | None = None
) -> tuple[list[CompoundEntity], list[CompoundEntity]]:
    """Map NER spans onto DA/AF compounds.

    DA = (Dosage or Strength) + optional adjacent Form; AF = Frequency.
    Basic entities are recovered by lexicon extraction inside each compound
    span. Compounds whose span yields no usable basic entity are dropped.
    """
    lexicon = lexicon or default_lexicon()
    items = _check_entities(sig, entities)
    das: list[CompoundEntity] = []
    afs: list[CompoundEntity] = []
    i = 0
    while i < len(items):
        label, span = items[i]
        if label in ("Dosage", "Strength"):
            end = span.end
            if i + 1 < len(items) and items[i + 1][0] == "Form":
                nxt = items[i + 1][1]
                gap = _gap_tokens(sig, span.end, nxt.start)
                if nxt.start >= span.end and not any(t.text in BOUNDARY_TOKENS for t in gap) \
                        and sum(t.text not in _GAP_IGNORED for t in gap) <= MAX_GAP:
                    end = nxt.end
                    i += 1
            inner = _basics_within(sig, span.start, end, lexicon)
            nv = [e for e in inner if e.entity_type is EntityType.NUMERICAL_VALUE]
            if nv:
                rest = [e for e in inner if e.entity_type in (EntityType.FORM, EntityType.UNITS, EntityType.ROUTE)]
                parts = [nv[0]] + rest
                qty = next((e for e in rest if e.entity_type in (EntityType.FORM, EntityType.UNITS)), None)
                unit_based = qty is not None and qty.entity_type is EntityType.UNITS
                das.append(CompoundEntity(CompoundKind.DA, Span.of(sig, span.start, end),
                                          tuple(_sorted(parts)), unit_based=unit_based))
        elif label == "Frequency":
            inner = _basics_within(sig, span.start, span.end, lexicon)
            if any(e.entity_type is EntityType.FREQUENCY for e in inner):
                parts = [e for e in inner if e.entity_type in
                         (EntityType.FREQUENCY_MOD, EntityType.NUMERICAL_VALUE, EntityType.FREQUENCY)]
                afs.append(CompoundEntity(CompoundKind.AF, span, tuple(parts)))
        i += 1
    return das, afs


def extract_external(
    sig: str, entities: Sequence[tuple[str, Span]], lexicon: Lexicon | None = None
) -> ExtractionResult:
    """ExtractionResult built from external NER spans instead of the DA/AF rules."""
    lexicon = lexicon or default_lexicon()
    das, afs = external_entities_to_compound(sig, entities, lexicon)
    claims = _claim_patterns(sig, lexicon)
    basics = _sorted({b for comp in (*das, *afs) for b in comp.basics})
    return _result(sig, basics, das, afs, claims)
