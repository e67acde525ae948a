"""Parsers turning free-text model responses into typed answers."""

from __future__ import annotations

import re

from .errors import ParseError

_LIKERT = re.compile(r"(?<!\d)(?<!\d\.)([1-5])(?!\d)(?!\.\d)")
_FIRST_WORD = re.compile(r"[A-Za-z]+")
_CHOICE_PAREN = re.compile(r"\(([ABCD])\)")
_CHOICE_CUE = re.compile(r"\b(?i:answer|choice|option|choose|select)\w*\s*(?i:is|:)?\s*\**([ABCD])\b")
# a bare capital letter, except the article "A" opening a lowercase phrase
_CHOICE_BARE = re.compile(r"(?<![\w'\-])([ABCD])(?![\w'\-])(?! [a-z])")


def parse_likert(text: str) -> int:
    """First standalone digit 1-5 in ``text``."""
    m = _LIKERT.search(text or "")
    if m is None:
        raise ParseError(f"no Likert value 1-5 in {text!r}")
    return int(m.group(1))


def parse_yes_no(text: str) -> bool:
    """True for a leading "yes", False for a leading "no"."""
    m = _FIRST_WORD.search(text or "")
    word = m.group(0).lower() if m else ""
    if word == "yes":
        return True
    if word == "no":
        return False
    raise ParseError(f"response does not start with yes/no: {text!r}")


def parse_choice(text: str) -> str:
    """The final choice A-D in ``text``: the conclusion wins.

    Parenthesized letters are preferred, then letters after a cue word such
    as "answer", then bare standalone letters; within a kind the last wins.
    """
    for pattern in (_CHOICE_PAREN, _CHOICE_CUE, _CHOICE_BARE):
        matches = pattern.findall(text or "")
        if matches:
            return matches[-1]
    raise ParseError(f"no choice A-D in {text!r}")


PARSERS = {"likert": parse_likert, "yes_no": parse_yes_no, "choice": parse_choice}
