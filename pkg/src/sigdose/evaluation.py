"""Scoring against expert ground truth.

End-to-end counting: a prediction is correct only when every ingredient's
min, max and unit agree with the ground truth. A wrong value counts as both
a false positive and a false negative; a value where the expert gave none is
a false positive; a null where the expert gave a value is a false negative.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .dosage import DailyDosage, DosageOutcome, IngredientDose
from .medorder import UnknownUnit, canonicalize_unit, format_amount

# Display units that differ only by a scale factor compare after alignment.
_ALIGN = {"mcg": ("mg", Fraction(1, 1000)), "g": ("mg", Fraction(1000)), "l": ("ml", Fraction(1000))}


class ScoringError(ValueError):
    pass


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def _aligned(dose: IngredientDose) -> tuple[Fraction, Fraction, str]:
    unit, scale = _ALIGN.get(dose.unit, (dose.unit, Fraction(1)))
    return dose.min_per_day * scale, dose.max_per_day * scale, unit


def same_dosage(a: DailyDosage, b: DailyDosage) -> bool:
    """Exact per-ingredient agreement on min, max and unit."""
    if len(a.per_ingredient) != len(b.per_ingredient):
        return False
    return all(_aligned(x) == _aligned(y) for x, y in zip(a.per_ingredient, b.per_ingredient))


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> Fraction:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Fraction:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)


@dataclass(frozen=True)
class EvalReport:
    n_correct_extracted: int
    n_incorrect_extracted: int
    n_missed: int
    n_spurious: int
    n_both_null: int
    entity_level: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, correct: int, incorrect: int, missed: int, spurious: int, both_null: int) -> "EvalReport":
        return cls(correct, incorrect, missed, spurious, both_null)

    @property
    def n(self) -> int:
        return (self.n_correct_extracted + self.n_incorrect_extracted + self.n_missed
                + self.n_spurious + self.n_both_null)

    @property
    def tp(self) -> int:
        return self.n_correct_extracted

    @property
    def fp(self) -> int:
        return self.n_incorrect_extracted + self.n_spurious

    @property
    def fn(self) -> int:
        return self.n_incorrect_extracted + self.n_missed

    @property
    def precision(self) -> Fraction:
        return PRF(self.tp, self.fp, self.fn).precision

    @property
    def recall(self) -> Fraction:
        return PRF(self.tp, self.fp, self.fn).recall

    @property
    def f1(self) -> Fraction:
        return PRF(self.tp, self.fp, self.fn).f1

    @property
    def accuracy(self) -> Fraction:
        return _ratio(self.tp + self.n_both_null, self.n)


def _value(x: DailyDosage | DosageOutcome | None) -> DailyDosage | None:
    return x.value if isinstance(x, DosageOutcome) else x


def score_end_to_end(
    predictions: Mapping[str, DailyDosage | DosageOutcome | None],
    ground_truth: Mapping[str, DailyDosage | None],
) -> EvalReport:
    """Confusion counts over orders keyed by ``order_id``.

    A null prediction matches a ground-truth "no daily dosage" whatever its
    reason code.
    """
    missing = sorted(set(ground_truth) - set(predictions))
    extra = sorted(set(predictions) - set(ground_truth))
    if missing or extra:
        raise ScoringError(f"order ids differ: missing predictions {missing}, unexpected predictions {extra}")
    counts = Counter()
    for key, gt in ground_truth.items():
        pred = _value(predictions[key])
        if gt is None:
            counts["both_null" if pred is None else "spurious"] += 1
        elif pred is None:
            counts["missed"] += 1
        else:
            counts["correct" if same_dosage(pred, gt) else "incorrect"] += 1
    return EvalReport(counts["correct"], counts["incorrect"], counts["missed"], counts["spurious"], counts["both_null"])


def score_entities(
    predicted: Mapping[str, Iterable[tuple[str, int, int]]],
    gold: Mapping[str, Iterable[tuple[str, int, int]]],
) -> dict[str, PRF]:
    """Strict span scoring: a hit needs identical ``(kind, start, end)``."""
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    kinds: set[str] = set()
    for key in set(predicted) | set(gold):
        pred = Counter(predicted.get(key, ()))
        ref = Counter(gold.get(key, ()))
        for item in pred | ref:
            kinds.add(item[0])
            hit = min(pred[item], ref[item])
            tp[item[0]] += hit
            fp[item[0]] += pred[item] - hit
            fn[item[0]] += ref[item] - hit
    return {k: PRF(tp[k], fp[k], fn[k]) for k in sorted(kinds)}


# ---------------------------------------------------------------------------
# rendering

def _pct(x: Fraction) -> str:
    return f"{float(x):.3f}"


def render_eval_table(report: EvalReport) -> str:
    rows = [
        ("", "extracted+CORRECT", "extracted+INCORRECT", "NOT extracted"),
        ("expert: extracted", str(report.n_correct_extracted), str(report.n_incorrect_extracted), str(report.n_missed)),
        ("expert: NOT extracted", "NA", str(report.n_spurious), str(report.n_both_null)),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append("")
    lines.append(f"N={report.n}  precision={_pct(report.precision)}  recall={_pct(report.recall)}  "
                 f"f1={_pct(report.f1)}  accuracy={_pct(report.accuracy)}")
    for kind, prf in sorted(report.entity_level.items()):
        lines.append(f"{kind}: P={_pct(prf.precision)} R={_pct(prf.recall)} F1={_pct(prf.f1)}")
    return "\n".join(lines) + "\n"


def render_entity_table(scores: Mapping[str, PRF]) -> str:
    header = ("kind", "tp", "fp", "fn", "P", "R", "F1")
    rows = [header] + [
        (k, str(s.tp), str(s.fp), str(s.fn), _pct(s.precision), _pct(s.recall), _pct(s.f1))
        for k, s in scores.items()
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def render_outcome_table(rows: Iterable[tuple[str, DosageOutcome]]) -> str:
    """Aligned per-order table followed by a histogram of null reasons."""
    rows = list(rows)
    if not rows:
        return ""
    table = [("order_id", "daily dosage / null reason")]
    reasons: Counter = Counter()
    for order_id, outcome in rows:
        if outcome.is_null:
            reasons[outcome.null_reason.value] += 1
            table.append((order_id, f"null: {outcome.null_reason.value}"))
        else:
            table.append((order_id, str(outcome.value)))
    w = max(len(r[0]) for r in table)
    lines = [f"{a.ljust(w)}  {b}" for a, b in table]
    lines.append("")
    lines.append(f"{len(rows)} orders, {len(rows) - sum(reasons.values())} with a value, "
                 f"{sum(reasons.values())} null")
    if reasons:
        rw = max(len(k) for k in reasons)
        for reason, count in sorted(reasons.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"  {reason.ljust(rw)}  {count}")
    return "\n".join(lines) + "\n"


def dosage_from_json(mins, maxs, units) -> DailyDosage:
    """Ground-truth dosage from per-ingredient lists (scalars are accepted)."""
    as_list = lambda v: list(v) if isinstance(v, (list, tuple)) else [v]
    maxs = as_list(maxs)
    mins = as_list(mins) if mins is not None else maxs
    units = as_list(units)
    if len(units) == 1 and len(maxs) > 1:
        units = units * len(maxs)
    if not (len(mins) == len(maxs) == len(units)):
        raise ValueError("ground-truth min/max/unit lists differ in length")
    doses = []
    for lo, hi, unit in zip(mins, maxs, units):
        lo, hi = Fraction(str(lo)), Fraction(str(hi))
        unit = str(unit).strip()
        if not unit.startswith("form:"):
            try:
                scale = canonicalize_unit(Fraction(1), unit)
                lo, hi, unit = lo * scale[0], hi * scale[0], scale[1]
            except UnknownUnit:
                unit = unit.lower()
        doses.append(IngredientDose(lo, hi, unit))
    return DailyDosage(tuple(doses))


def dosage_to_json(value: DailyDosage) -> list[dict]:
    return [{"min": format_amount(d.min_per_day), "max": format_amount(d.max_per_day), "unit": d.unit}
            for d in value.per_ingredient]
