"""Clean Descriptors rule set.

Each rule returns character spans of ``text`` to redact. Word boundaries are
transitions between ASCII alphanumerics and anything else.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from deid.core.errors import ConfigError

if TYPE_CHECKING:
    from deid.cleaning.context import CleanContext

Span = tuple[int, int]

_LEFT = r"(?<![A-Za-z0-9])"
_RIGHT = r"(?![A-Za-z0-9])"

_DATE_RE = re.compile(r"(?<!\d)\d{4}(0[1-9]|1[0-2])(0[1-9]|[12]\d|3[01])(?!\d)")
_YEAR_RE = re.compile(_LEFT + r"(19\d\d|20\d\d)" + _RIGHT)
_DIGIT_RUN_RE = re.compile(r"[0-9()\-xX]{9,}")


@dataclass(frozen=True)
class CleanRule:
    rule_id: str
    description: str
    find: Callable[[str, CleanContext], list[Span]]


def _word_pattern(words: Iterable[str]) -> re.Pattern[str] | None:
    ordered = sorted({word for word in words if word}, key=lambda word: (-len(word), word))
    if not ordered:
        return None
    alternation = "|".join(re.escape(word) for word in ordered)
    return re.compile(_LEFT + f"(?:{alternation})" + _RIGHT, re.IGNORECASE)


def rule_r1_tokens(text: str, ctx: CleanContext) -> list[Span]:
    """Whole-word occurrences of patient name / ID tokens."""
    pattern = _word_pattern(ctx.tokens)
    if pattern is None:
        return []
    return [match.span() for match in pattern.finditer(text)]


def rule_r2_triggers(text: str, ctx: CleanContext) -> list[Span]:
    """From the leftmost trigger word to the end of the value."""
    pattern = _word_pattern(ctx.triggers)
    if pattern is None:
        return []
    match = pattern.search(text)
    if match is None:
        return []
    return [(match.start(), len(text))]


def rule_r3_dates(text: str, ctx: CleanContext) -> list[Span]:
    """yyyymmdd dates and standalone years 1900-2099."""
    spans = [match.span() for match in _DATE_RE.finditer(text)]
    spans.extend(match.span() for match in _YEAR_RE.finditer(text))
    return spans


def rule_r4_digit_runs(text: str, ctx: CleanContext) -> list[Span]:
    """Runs of 9+ characters from digits, parentheses, dashes and x."""
    return [match.span() for match in _DIGIT_RUN_RE.finditer(text)]


def rule_addr(text: str, ctx: CleanContext) -> list[Span]:
    """House number through street keyword, and state keyword plus ZIP."""
    keywords = _word_alternation(ctx.address_keywords)
    if keywords is None:
        return []
    street = re.compile(
        _LEFT + r"\d+\s+(?:[A-Za-z]+\.?\s+){0,4}?(?:" + keywords + r")\.?" + _RIGHT,
        re.IGNORECASE,
    )
    state_zip = re.compile(
        _LEFT + r"(?:" + keywords + r")\s+\d{5}(?:-\d{4})?(?!\d)", re.IGNORECASE
    )
    spans = [match.span() for match in street.finditer(text)]
    spans.extend(match.span() for match in state_zip.finditer(text))
    return spans


def _word_alternation(words: Iterable[str]) -> str | None:
    ordered = sorted({word for word in words if word}, key=lambda word: (-len(word), word))
    if not ordered:
        return None
    return "|".join(re.escape(word) for word in ordered)


DEFAULT_RULES: tuple[CleanRule, ...] = (
    CleanRule("R1", "patient name and ID tokens", rule_r1_tokens),
    CleanRule("R2", "text after trigger words", rule_r2_triggers),
    CleanRule("R3", "dates and years", rule_r3_dates),
    CleanRule("R4", "digit runs", rule_r4_digit_runs),
)

ADDRESS_RULE = CleanRule("ADDR", "street and state keywords", rule_addr)


def _regex_rule(rule_id: str, regex: re.Pattern[str], description: str) -> CleanRule:
    def find(text: str, ctx: CleanContext) -> list[Span]:
        return [match.span() for match in regex.finditer(text) if match.end() > match.start()]

    return CleanRule(rule_id, description, find)


def load_rule_extensions(path: Path) -> tuple[CleanRule, ...]:
    """Read ``RULEID;REGEX;DESCRIPTION`` lines; regexes are word-anchored and case-insensitive."""
    rules: list[CleanRule] = []
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split(";", 2)
        if len(parts) != 3 or not parts[0].strip() or not parts[1]:
            raise ConfigError(f"{path}:{line_number}: expected RULEID;REGEX;DESCRIPTION")
        rule_id, expression, description = (part.strip() for part in parts)
        try:
            regex = re.compile(_LEFT + f"(?:{expression})" + _RIGHT, re.IGNORECASE)
        except re.error as exc:
            raise ConfigError(f"{path}:{line_number}: bad regex for {rule_id}: {exc}") from exc
        rules.append(_regex_rule(rule_id, regex, description))
    return tuple(rules)
