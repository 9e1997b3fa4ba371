"""Offset-preserving tokenizer shared by the lexicon and the extractor."""

from __future__ import annotations

import re
from dataclasses import dataclass

_NUMBER = r"(?:\d+(?:\.\d+)?|\.\d+)(?:[-/](?:\d+(?:\.\d+)?|\.\d+))*"
_PAREN_NUMBER = r"\(\s*" + _NUMBER + r"\s*\)"
_ABBREV = r"[^\W\d_](?:\.[^\W\d_])+"
_WORD = r"[^\W_]+(?:[-/][^\W_]+)*"
_SUFFIX = r"(?:\((?:\d+(?:\.\d+)?|s|es)\))?"

TOKEN_RE = re.compile(
    rf"{_PAREN_NUMBER}|{_NUMBER}{_SUFFIX}|{_ABBREV}|{_WORD}{_SUFFIX}|[^\s\w]|_",
    re.UNICODE,
)
_PLURAL_SUFFIX_RE = re.compile(r"\((?:s|es)\)$")
_ABBREV_RE = re.compile(rf"^{_ABBREV}$")


@dataclass(frozen=True)
class Token:
    text: str  # lowercased
    start: int
    end: int

    @property
    def key(self) -> str:
        return token_key(self.text)

    @property
    def is_punct(self) -> bool:
        return len(self.text) == 1 and not self.text.isalnum()


def token_key(text: str) -> str:
    """Lookup key for a token: case-folded, "(s)" stripped, abbreviation dots dropped.

    casefold (not lower) so the micro sign and Greek mu share a key.
    """
    text = _PLURAL_SUFFIX_RE.sub("", text.casefold())
    if _ABBREV_RE.match(text):
        text = text.replace(".", "")
    return text


def tokenize(sig: str) -> list[Token]:
    """Split ``sig`` into lowercased tokens that keep their character offsets.

    Numbers glued to ranges or fractions ("1-2", "1/2"), words carrying a
    parenthesized restatement ("one(1)") and dotted abbreviations ("p.o")
    each stay a single token. Other punctuation becomes one token per char.
    """
    return [Token(m.group(0).lower(), m.start(), m.end()) for m in TOKEN_RE.finditer(sig)]
