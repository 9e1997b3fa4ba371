"""Small Sig grammars shared by the property and acceptance tests.

Every generator takes a ``random.Random`` and returns the Sig together with
the numbers needed by an oracle that does not touch the package.
"""

from __future__ import annotations

import random
from fractions import Fraction

F = Fraction

# surface -> (min, max) count per administration
DA_CHOICES = {
    "1": (F(1), F(1)),
    "1/2": (F(1, 2), F(1, 2)),
    "1-2": (F(1), F(2)),
    "2": (F(2), F(2)),
}
# surface -> (min, max) administrations per day
AF_CHOICES = {
    "daily": (F(1), F(1)),
    "bid": (F(2), F(2)),
    "twice daily": (F(2), F(2)),
    "q week": (F(1, 7), F(1, 7)),
    "every 4-6 hours": (F(24, 6), F(24, 4)),
}
ROUTES = ["", "po", "by mouth"]
LEADS = ["", "Take ", "take "]
STRENGTHS = [F(1), F(2), F(5), F(10), F(25), F(50), F(F(15, 2)), F(100), F(250), F(500)]


def tab_word(rng: random.Random, da: str) -> str:
    plural = da not in ("1", "1/2")
    return rng.choice(["tabs", "tablets"] if plural else ["tab", "tablet"])


def corner_sig(rng: random.Random) -> tuple[str, tuple[F, F], tuple[F, F]]:
    da = rng.choice(sorted(DA_CHOICES))
    af = rng.choice(sorted(AF_CHOICES))
    route = rng.choice(ROUTES)
    parts = [da, tab_word(rng, da)] + ([route] if route else []) + [af]
    return rng.choice(LEADS) + " ".join(parts), DA_CHOICES[da], AF_CHOICES[af]


def corner_oracle(da: tuple[F, F], af: tuple[F, F], strength: F) -> tuple[F, F]:
    products = [d * a * strength for d in da for a in af]
    return min(products), max(products)


WEEKLY = ["q week", "weekly", "every week", "once weekly", "once a week", "qweek", "one time per week"]


def weekly_sig(rng: random.Random) -> tuple[str, F]:
    n = rng.choice([F(1), F(2), F(3), F(1, 2), F(4)])
    text = {F(1, 2): "1/2", F(1): rng.choice(["1", "one"]), F(2): rng.choice(["2", "two"])}.get(n, str(n))
    form = "tab" if n <= 1 else "tabs"
    route = rng.choice(ROUTES)
    body = " ".join(p for p in [text, form, route, rng.choice(WEEKLY)] if p)
    return rng.choice(LEADS) + body, n


SLOT_PAIRS = [
    ("in am", "in pm"),
    ("in the morning", "in the evening"),
    ("in the morning", "at bedtime"),
    ("every morning", "every evening"),
    ("qam", "qhs"),
]
JOINERS = [" and ", ". Take ", ", "]
COUNTS = {"1": F(1), "2": F(2), "1/2": F(1, 2), "one": F(1), "two": F(2), "three": F(3)}


def additive_sig(rng: random.Random) -> tuple[str, str, str]:
    """Two-DE am/pm Sig plus each DE on its own."""
    first, second = rng.choice(SLOT_PAIRS)
    a, b = rng.choice(sorted(COUNTS)), rng.choice(sorted(COUNTS))
    de1 = f"{a} {'tab' if COUNTS[a] <= 1 else 'tabs'} {first}"
    de2 = f"{b} {'tab' if COUNTS[b] <= 1 else 'tabs'} {second}"
    return f"Take {de1}{rng.choice(JOINERS)}{de2}", f"Take {de1}", f"Take {de2}"


NULL_SIGS = [
    "Take as directed.",
    "Take 1 tablet by mouth.",
    "Take 1 tablet by mouth one time only.",
    "Take 6 tab day1, 5 tab day 2, 4 tab day3 , 3 tab day 4, 2 tab day 5, 1 tab day 6.",
    "1 tab po monthly",
]


def linear_case(rng: random.Random) -> tuple[str, list[F]]:
    """A form-based Sig (sometimes one that should be null) and a strength."""
    if rng.random() < 0.15:
        sig = rng.choice(NULL_SIGS)
    elif rng.random() < 0.5:
        sig = corner_sig(rng)[0]
    else:
        sig = additive_sig(rng)[0]
    n = rng.choice([1, 1, 2])
    return sig, [rng.choice(STRENGTHS) for _ in range(n)]


def fmt(x: F) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return str(float(x)) if (x * 1000).denominator == 1 else f"{x.numerator}/{x.denominator}"


def strength_text(amounts: list[F], unit: str = "mg") -> str:
    return "-".join(fmt(a) for a in amounts) + f" {unit}"


FUZZ_ALPHABET = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ 0123456789 ()-/.,;:=&#'\"µé\t\n"
FUZZ_WORDS = ["tab", "tabs", "mg", "daily", "bid", "q", "every", "hours", "1-2", "one(1)", "(", ")", "max",
              "=", "/day", "and", "am", "pm", "po", "for", "7", "days", "1/2", "as", "needed", "week", ""]


def fuzz_string(rng: random.Random) -> str:
    if rng.random() < 0.5:
        return "".join(rng.choice(FUZZ_ALPHABET) for _ in range(rng.randint(0, 80)))
    return " ".join(rng.choice(FUZZ_WORDS) for _ in range(rng.randint(0, 20)))
