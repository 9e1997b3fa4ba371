"""Curated lexicon of basic entity surface forms and their normalized values.

The lexicon file is tab separated, one entry per line::

    surface<TAB>type<TAB>normalization

``#`` starts a comment line. Normalization columns by type:

* ``NumericalValue``  -> ``min[,max]``
* ``Units``           -> ``canonical_unit,scale``
* ``Frequency``       -> ``period_days,implicit_count``
* ``FrequencyMod``    -> ``multiplier``
* ``Form`` / ``Route`` -> canonical name

Numbers may be written as integers, decimals or fractions (``1/24``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence, Union

from .tokenize import Token, token_key, tokenize


class EntityType(str, Enum):
    NUMERICAL_VALUE = "NumericalValue"
    FORM = "Form"
    UNITS = "Units"
    ROUTE = "Route"
    FREQUENCY = "Frequency"
    FREQUENCY_MOD = "FrequencyMod"


# Exact-tie preference when one surface carries several types.
TYPE_PRIORITY = (
    EntityType.FORM,
    EntityType.UNITS,
    EntityType.FREQUENCY,
    EntityType.FREQUENCY_MOD,
    EntityType.ROUTE,
    EntityType.NUMERICAL_VALUE,
)


@dataclass(frozen=True)
class NumericNorm:
    value_min: Fraction
    value_max: Fraction

    def __post_init__(self):
        if not 0 <= self.value_min <= self.value_max:
            raise ValueError(f"bad numeric range {self.value_min}..{self.value_max}")


@dataclass(frozen=True)
class FormNorm:
    canonical_form: str


@dataclass(frozen=True)
class UnitNorm:
    canonical_unit: str
    scale_to_canonical: Fraction

    def __post_init__(self):
        if self.scale_to_canonical <= 0:
            raise ValueError("unit scale must be positive")


@dataclass(frozen=True)
class RouteNorm:
    canonical_route: str


@dataclass(frozen=True)
class FrequencyNorm:
    period_days: Fraction
    implicit_count: Fraction = Fraction(1)
    # Upper end of the period for ranged intervals ("every 4-6 hours").
    period_days_max: Fraction | None = None

    def __post_init__(self):
        if self.period_days <= 0 or self.implicit_count <= 0:
            raise ValueError("frequency period and count must be positive")
        if self.period_days_max is not None and self.period_days_max < self.period_days:
            raise ValueError("period_days_max below period_days")

    @property
    def period_max(self) -> Fraction:
        return self.period_days if self.period_days_max is None else self.period_days_max


@dataclass(frozen=True)
class ModifierNorm:
    multiplier: Fraction

    def __post_init__(self):
        if self.multiplier <= 0:
            raise ValueError("frequency modifier must be positive")


Normalization = Union[NumericNorm, FormNorm, UnitNorm, RouteNorm, FrequencyNorm, ModifierNorm]


@dataclass(frozen=True)
class LexiconEntry:
    surface: tuple[str, ...]
    entity_type: EntityType
    normalization: Normalization

    @property
    def text(self) -> str:
        return " ".join(self.surface)


@dataclass(frozen=True)
class LexiconMatch:
    """Every entry matching the longest token run at a position, best first."""

    candidates: tuple[LexiconEntry, ...]
    length: int

    @property
    def entry(self) -> LexiconEntry:
        return self.candidates[0]

    def of_type(self, entity_type: EntityType) -> LexiconEntry | None:
        for cand in self.candidates:
            if cand.entity_type is entity_type:
                return cand
        return None


class LexiconError(ValueError):
    """Raised for malformed or duplicate lexicon rows."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[LexiconEntry, ...] = ()
    _index: dict = field(default_factory=dict, repr=False, compare=False)
    _max_len: int = field(default=0, repr=False, compare=False)

    @classmethod
    def from_entries(cls, entries: Sequence[LexiconEntry]) -> "Lexicon":
        index: dict[tuple[str, ...], dict[EntityType, LexiconEntry]] = {}
        for entry in entries:
            slot = index.setdefault(entry.surface, {})
            if entry.entity_type in slot:
                raise LexiconError(f"duplicate entry {entry.text!r} ({entry.entity_type.value})")
            slot[entry.entity_type] = entry
        max_len = max((len(k) for k in index), default=0)
        return cls(tuple(entries), index, max_len)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, surface: str, entity_type: EntityType | None = None) -> LexiconEntry | None:
        key = surface_key(surface)
        slot = self._index.get(key)
        if not slot:
            return None
        if entity_type is not None:
            return slot.get(entity_type)
        return _ranked(slot)[0]

    def lookup(self, tokens: Sequence[Token | str], start: int) -> LexiconMatch | None:
        return lookup_longest(tokens, start, self)


def surface_key(surface: str) -> tuple[str, ...]:
    return tuple(tok.key for tok in tokenize(surface))


def _ranked(slot: dict[EntityType, LexiconEntry]) -> tuple[LexiconEntry, ...]:
    return tuple(slot[t] for t in TYPE_PRIORITY if t in slot)


def lookup_longest(tokens: Sequence[Token | str], start: int, lexicon: Lexicon) -> LexiconMatch | None:
    """Longest surface match beginning at ``tokens[start]``.

    All entries sharing that longest surface are returned as candidates,
    ordered by :data:`TYPE_PRIORITY`.
    """
    if not 0 <= start < len(tokens):
        raise IndexError(f"start {start} outside token sequence of length {len(tokens)}")
    keys = [t.key if isinstance(t, Token) else token_key(t) for t in tokens[start:start + lexicon._max_len]]
    for length in range(len(keys), 0, -1):
        slot = lexicon._index.get(tuple(keys[:length]))
        if slot:
            return LexiconMatch(_ranked(slot), length)
    return None


# ---------------------------------------------------------------------------
# numbers

_NUM = r"(?:\d+(?:\.\d+)?|\.\d+)(?:/(?:\d+(?:\.\d+)?))?"
_NUMERIC_RE = re.compile(rf"^(?P<lo>{_NUM})(?:\s*-\s*(?P<hi>{_NUM}))?$")
_RESTATED_RE = re.compile(r"^(?P<word>[^\W\d_]*)\(\s*(?P<num>[^()]+?)\s*\)$")


def parse_number(text: str) -> Fraction | None:
    """Exact value of "2", "0.25", ".5" or "1/2"; None otherwise."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        return None
    return value if value >= 0 else None


def parse_numeric_token(token: str) -> tuple[Fraction, Fraction] | None:
    """Parse a numeric token into a ``(min, max)`` pair.

    >>> parse_numeric_token("1-2")
    (Fraction(1, 1), Fraction(2, 1))
    >>> parse_numeric_token("one(1)")
    (Fraction(1, 1), Fraction(1, 1))

    Word numbers on their own are the lexicon's job; here only the
    parenthesized digits of a restatement like "one(1)" are read.
    """
    token = token.strip()
    m = _RESTATED_RE.match(token)
    if m:
        token = m.group("num")
    m = _NUMERIC_RE.match(token)
    if not m:
        return None
    lo = parse_number(m.group("lo"))
    hi = parse_number(m.group("hi")) if m.group("hi") else lo
    if lo is None or hi is None or hi < lo:
        return None
    return lo, hi


# ---------------------------------------------------------------------------
# loading

def _fraction(text: str, line: int) -> Fraction:
    value = parse_number(text)
    if value is None:
        raise LexiconError(f"unparseable number {text!r}", line)
    return value


def _parse_norm(entity_type: EntityType, cols: list[str], line: int) -> Normalization:
    if len(cols) != 1:
        raise LexiconError(f"expected 3 columns, got {len(cols) + 2}", line)
    parts = [p.strip() for p in cols[0].split(",")]
    if entity_type in (EntityType.FORM, EntityType.ROUTE):
        if len(parts) != 1 or not parts[0]:
            raise LexiconError("expected one canonical name", line)
        name = parts[0].lower()
        return FormNorm(name) if entity_type is EntityType.FORM else RouteNorm(name)
    try:
        if entity_type is EntityType.NUMERICAL_VALUE:
            if len(parts) not in (1, 2):
                raise LexiconError("expected min[,max]", line)
            lo = _fraction(parts[0], line)
            hi = _fraction(parts[-1], line)
            return NumericNorm(lo, hi)
        if entity_type is EntityType.UNITS:
            if len(parts) != 2 or not parts[0]:
                raise LexiconError("expected canonical_unit,scale", line)
            return UnitNorm(parts[0].lower(), _fraction(parts[1], line))
        if entity_type is EntityType.FREQUENCY:
            if len(parts) != 2:
                raise LexiconError("expected period_days,implicit_count", line)
            return FrequencyNorm(_fraction(parts[0], line), _fraction(parts[1], line))
        if len(parts) != 1:
            raise LexiconError("expected multiplier", line)
        return ModifierNorm(_fraction(parts[0], line))
    except LexiconError:
        raise
    except ValueError as exc:
        raise LexiconError(str(exc), line) from exc


def load_lexicon(source: str) -> Lexicon:
    """Parse lexicon file contents (not a path) into a :class:`Lexicon`."""
    entries: list[LexiconEntry] = []
    seen: dict[tuple[tuple[str, ...], EntityType], int] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = raw.rstrip("\r\n").split("\t")
        if len(cols) < 3:
            raise LexiconError(f"expected 3 columns, got {len(cols)}", lineno)
        surface, type_name = cols[0].strip(), cols[1].strip()
        try:
            entity_type = EntityType(type_name)
        except ValueError:
            raise LexiconError(f"unknown entity type {type_name!r}", lineno) from None
        key = surface_key(surface)
        if not key:
            raise LexiconError("empty surface", lineno)
        norm = _parse_norm(entity_type, cols[2:], lineno)
        if (key, entity_type) in seen:
            raise LexiconError(
                f"duplicate entry {surface!r} ({type_name}), first on line {seen[key, entity_type]}", lineno
            )
        seen[key, entity_type] = lineno
        entries.append(LexiconEntry(key, entity_type, norm))
    return Lexicon.from_entries(entries)


def read_lexicon(path: str | Path) -> Lexicon:
    return load_lexicon(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    """The starter lexicon shipped with the package."""
    text = resources.files("sigdose").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
    return load_lexicon(text)
