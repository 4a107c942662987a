"""Confidentiality action table: loader and tag matcher.

Line format::

    (0008,0020);Z;retain_full_dates=K,retain_modified_dates=C   # StudyDate

Tags may use ``x`` hex wildcards, e.g. ``(60xx,4000)``. An exact entry always
beats a pattern; among patterns the one with more fixed hex digits wins.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from importlib import resources

from deid.codec.tags import Tag
from deid.core.errors import ActionTableParseError, DuplicateTag

_PATTERN_RE = re.compile(r"^\(?([0-9A-Fa-fxX]{4}),([0-9A-Fa-fxX]{4})\)?$")


class BasicAction(StrEnum):
    REMOVE = "X"
    ZERO = "Z"
    DUMMY = "D"
    UID = "U"
    CLEAN = "C"
    ZERO_OR_DUMMY = "Z/D"
    REMOVE_OR_ZERO = "X/Z"
    REMOVE_OR_DUMMY = "X/D"
    REMOVE_ZERO_OR_DUMMY = "X/Z/D"
    REMOVE_ZERO_OR_UID = "X/Z/U*"

    @property
    def is_compound(self) -> bool:
        return "/" in self.value

    @property
    def choices(self) -> tuple[str, ...]:
        return tuple(self.value.split("/"))


class OverrideAction(StrEnum):
    KEEP = "K"
    CLEAN = "C"


# Option names accepted on the right of the third field; kept in step with ProfileOptions.
OPTION_NAMES = frozenset(
    {
        "clean_descriptors",
        "retain_safe_private",
        "retain_uids",
        "retain_device_identity",
        "retain_institution_identity",
        "retain_patient_characteristics",
        "retain_full_dates",
        "retain_modified_dates",
    }
)


@dataclass(frozen=True)
class DeidActionEntry:
    pattern: str
    mask: int
    value: int
    basic_action: BasicAction
    overrides: dict[str, OverrideAction] = field(default_factory=dict)
    keyword: str = ""

    @property
    def is_exact(self) -> bool:
        return self.mask == 0xFFFFFFFF

    @property
    def tag(self) -> Tag | None:
        return Tag.from_int(self.value) if self.is_exact else None

    @property
    def specificity(self) -> int:
        return sum(1 for shift in range(0, 32, 4) if (self.mask >> shift) & 0xF)

    def matches(self, tag: Tag) -> bool:
        return (int(tag) & self.mask) == self.value


def _parse_pattern(text: str) -> tuple[int, int]:
    match = _PATTERN_RE.match(text.strip())
    if match is None:
        raise ValueError(f"not a tag or tag pattern: {text!r}")
    digits = (match.group(1) + match.group(2)).lower()
    mask = 0
    value = 0
    for char in digits:
        mask <<= 4
        value <<= 4
        if char != "x":
            mask |= 0xF
            value |= int(char, 16)
    return mask, value


class ActionTable:
    """Immutable set of action entries with exact-then-pattern lookup."""

    def __init__(self, entries: list[DeidActionEntry]):
        self._entries = list(entries)
        self._exact = {entry.value: entry for entry in entries if entry.is_exact}
        self._patterns = sorted(
            (entry for entry in entries if not entry.is_exact),
            key=lambda entry: -entry.specificity,
        )

    def __iter__(self) -> Iterator[DeidActionEntry]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def match(self, tag: Tag) -> DeidActionEntry | None:
        exact = self._exact.get(int(tag))
        if exact is not None:
            return exact
        for entry in self._patterns:
            if entry.matches(tag):
                return entry
        return None


def load_action_table(text: str) -> ActionTable:
    entries: list[DeidActionEntry] = []
    seen: dict[tuple[int, int], int] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        body, _, comment = line.partition("#")
        body = body.strip()
        if not body:
            continue
        fields = [item.strip() for item in body.split(";")]
        if len(fields) not in (2, 3):
            raise ActionTableParseError(
                line_number, f"expected 2 or 3 ';' fields, got {len(fields)}"
            )
        try:
            mask, value = _parse_pattern(fields[0])
        except ValueError as exc:
            raise ActionTableParseError(line_number, str(exc)) from exc
        try:
            basic = BasicAction(fields[1].upper())
        except ValueError as exc:
            raise ActionTableParseError(line_number, f"unknown action {fields[1]!r}") from exc

        overrides: dict[str, OverrideAction] = {}
        if len(fields) == 3 and fields[2]:
            for pair in fields[2].split(","):
                option, sep, action = pair.partition("=")
                option = option.strip()
                if not sep or option not in OPTION_NAMES:
                    raise ActionTableParseError(line_number, f"unknown option override {pair!r}")
                try:
                    overrides[option] = OverrideAction(action.strip().upper())
                except ValueError as exc:
                    raise ActionTableParseError(
                        line_number, f"override action must be K or C, got {action!r}"
                    ) from exc

        key = (mask, value)
        if key in seen:
            raise DuplicateTag(
                f"{fields[0]} on line {line_number} already defined on line {seen[key]}"
            )
        seen[key] = line_number
        entries.append(
            DeidActionEntry(
                pattern=fields[0],
                mask=mask,
                value=value,
                basic_action=basic,
                overrides=overrides,
                keyword=comment.strip(),
            )
        )
    return ActionTable(entries)


def default_action_table() -> ActionTable:
    text = resources.files("deid.dictionary").joinpath("data/basic_profile.txt").read_text("utf-8")
    return load_action_table(text)
