"""Rules-based free-text cleaner.

Rules run in order R1..R4 (then ADDR and extension rules when configured)
over a working copy in which every redacted span is blanked out. The pass is
repeated until no rule finds anything new, so cleaning a cleaned value
changes nothing. Spans always refer to the original text.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import NamedTuple

from deid.cleaning.context import CleanContext
from deid.cleaning.rules import ADDRESS_RULE, DEFAULT_RULES, CleanRule

logger = logging.getLogger(__name__)

_BLANK = " "
_SPACE_RUN_RE = re.compile(r"[ \t]{2,}")


@dataclass(frozen=True)
class Redaction:
    rule_id: str
    start: int
    end: int
    replacement: str = ""


class CleanResult(NamedTuple):
    text: str
    redactions: list[Redaction]


def active_rules(ctx: CleanContext) -> tuple[CleanRule, ...]:
    rules = DEFAULT_RULES
    if ctx.address_keywords:
        rules = (*rules, ADDRESS_RULE)
    return (*rules, *ctx.extensions)


def _merge(spans: list[tuple[int, int, str]], replacement: str) -> list[Redaction]:
    merged: list[Redaction] = []
    for start, end, rule_id in sorted(spans):
        if merged and start <= merged[-1].end:
            last = merged[-1]
            rule_ids = last.rule_id.split("+")
            if rule_id not in rule_ids:
                rule_ids.append(rule_id)
            merged[-1] = Redaction("+".join(rule_ids), last.start, max(last.end, end), replacement)
        else:
            merged.append(Redaction(rule_id, start, end, replacement))
    return merged


def apply_redactions(text: str, redactions: list[Redaction], replacement: str = "") -> str:
    """Rebuild the cleaned value from the original text and its redaction spans."""
    if not redactions:
        return text
    pieces: list[str] = []
    cursor = 0
    for redaction in sorted(redactions, key=lambda item: item.start):
        pieces.append(text[cursor : redaction.start])
        pieces.append(replacement or _BLANK)
        cursor = max(cursor, redaction.end)
    pieces.append(text[cursor:])
    return _SPACE_RUN_RE.sub(" ", "".join(pieces)).strip(" \t")


def clean_text(text: str, ctx: CleanContext) -> CleanResult:
    if not text:
        return CleanResult(text, [])
    rules = active_rules(ctx)
    blanked = [False] * len(text)
    working = text
    found: list[tuple[int, int, str]] = []
    while True:
        new: list[tuple[int, int, str]] = []
        for rule in rules:
            for start, end in rule.find(working, ctx):
                if end <= start or all(blanked[start:end]):
                    continue
                new.append((start, end, rule.rule_id))
        if not new:
            break
        for start, end, _ in new:
            for index in range(start, end):
                blanked[index] = True
        working = "".join(
            _BLANK if flag else char for char, flag in zip(text, blanked, strict=True)
        )
        found.extend(new)

    redactions = _merge(found, ctx.replacement)
    for redaction in redactions:
        logger.debug("text redaction", extra={"rule_id": redaction.rule_id})
    return CleanResult(apply_redactions(text, redactions, ctx.replacement), redactions)
