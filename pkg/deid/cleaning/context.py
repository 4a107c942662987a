from __future__ import annotations

import logging
import re
from collections.abc import Iterable
from dataclasses import dataclass, field

from deid.cleaning.rules import CleanRule
from deid.codec.dataset import DataSet
from deid.codec.tags import Tag

logger = logging.getLogger(__name__)

PATIENT_NAME = Tag(0x0010, 0x0010)
PATIENT_ID = Tag(0x0010, 0x0020)

DEFAULT_TRIGGERS = frozenset({"for", "by", "at", "to", "on"})
ALL_TRIGGERS = DEFAULT_TRIGGERS | {"in"}
MIN_TOKEN_LENGTH = 2

_NAME_SPLIT_RE = re.compile(r"[\^=\s,]+")


def _tokens(values: Iterable[str], splitter: re.Pattern[str] | None) -> frozenset[str]:
    tokens: set[str] = set()
    for value in values:
        parts = splitter.split(value) if splitter is not None else [value]
        for part in parts:
            token = part.strip().lower()
            if not token:
                continue
            if len(token) < MIN_TOKEN_LENGTH:
                logger.debug("context token below length floor ignored")
                continue
            tokens.add(token)
    return frozenset(tokens)


@dataclass(frozen=True)
class CleanContext:
    """Per-object inputs to the cleaner; built from the original (pre-profile) dataset."""

    name_tokens: frozenset[str] = frozenset()
    id_tokens: frozenset[str] = frozenset()
    extra_tokens: frozenset[str] = frozenset()
    triggers: frozenset[str] = DEFAULT_TRIGGERS
    address_keywords: frozenset[str] = frozenset()
    replacement: str = ""
    extensions: tuple[CleanRule, ...] = field(default=())

    @property
    def tokens(self) -> frozenset[str]:
        return self.name_tokens | self.id_tokens | self.extra_tokens

    @classmethod
    def from_values(
        cls,
        *,
        patient_name: str | None = None,
        patient_id: str | None = None,
        extra_tokens: Iterable[str] = (),
        triggers: Iterable[str] = DEFAULT_TRIGGERS,
        address_keywords: Iterable[str] = (),
        replacement: str = "",
        extensions: tuple[CleanRule, ...] = (),
    ) -> CleanContext:
        return cls(
            name_tokens=_tokens([patient_name or ""], _NAME_SPLIT_RE),
            id_tokens=_tokens([patient_id or ""], None),
            extra_tokens=_tokens(extra_tokens, None),
            triggers=frozenset(trigger.lower() for trigger in triggers),
            address_keywords=frozenset(keyword.lower() for keyword in address_keywords),
            replacement=replacement,
            extensions=extensions,
        )

    @classmethod
    def from_dataset(cls, ds: DataSet, **kwargs: object) -> CleanContext:
        return cls.from_values(
            patient_name=ds.get_text(PATIENT_NAME),
            patient_id=ds.get_text(PATIENT_ID),
            **kwargs,  # type: ignore[arg-type]
        )
