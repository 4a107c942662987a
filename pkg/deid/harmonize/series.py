"""Series-level harmonization of key attributes.

Within each series every listed attribute is forced to the majority value.
Absence counts as a candidate: a tag missing from most members is removed
from all, and a tag missing from a minority is inserted with the canonical
value. Ties go to the value of the member with the lowest InstanceNumber,
then to the lexicographically smallest encoded value.
"""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from deid.codec.dataset import DataElement, DataSet
from deid.codec.tags import Tag
from deid.codec.writer import encode_value

logger = logging.getLogger(__name__)

SERIES_INSTANCE_UID = Tag(0x0020, 0x000E)
INSTANCE_NUMBER = Tag(0x0020, 0x0013)
DEFAULT_HARMONIZE_TAGS: tuple[Tag, ...] = (Tag(0x0008, 0x103E), Tag(0x0020, 0x0011))

QUARANTINE = "<no-series-uid>"

# Key for "tag absent"; distinct from a present empty value, ranks like "" in tie-breaks.
_ABSENT_KEY = b"\x00<absent>"


@dataclass
class SeriesMember:
    file_id: str
    dataset: DataSet


@dataclass
class SeriesGroup:
    series_uid: str
    members: list[SeriesMember] = field(default_factory=list)

    @property
    def quarantined(self) -> bool:
        return self.series_uid == QUARANTINE


@dataclass
class TagReport:
    tag: Tag
    observed: dict[bytes, int]
    canonical: bytes | None
    rewritten: int


@dataclass
class HarmonizationReport:
    series_uid: str
    member_count: int
    tags: list[TagReport] = field(default_factory=list)

    @property
    def rewritten(self) -> int:
        return sum(item.rewritten for item in self.tags)

    def as_audit_dict(self) -> dict[str, object]:
        """Audit form: observed values appear only as sha256 hashes."""
        return {
            "series_uid_hash": _sha(self.series_uid.encode("utf-8")),
            "member_count": self.member_count,
            "tags": [
                {
                    "tag": str(item.tag),
                    "observed": {
                        ("absent" if value is None else _sha(value)): count
                        for value, count in _restore_absent(item.observed)
                    },
                    "canonical": None if item.canonical is None else _sha(item.canonical),
                    "rewritten": item.rewritten,
                }
                for item in self.tags
            ],
        }


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _restore_absent(observed: dict[bytes, int]) -> list[tuple[bytes | None, int]]:
    return [(None if value == _ABSENT_KEY else value, count) for value, count in observed.items()]


def group_by_series(members: Iterable[tuple[str, DataSet]]) -> list[SeriesGroup]:
    """Partition by SeriesInstanceUID; objects without one land in the quarantine group."""
    groups: dict[str, SeriesGroup] = {}
    for file_id, ds in members:
        series_uid = ds.get_text(SERIES_INSTANCE_UID) or QUARANTINE
        groups.setdefault(series_uid, SeriesGroup(series_uid)).members.append(
            SeriesMember(file_id, ds)
        )
    return [groups[key] for key in sorted(groups)]


def _value_key(element: DataElement | None, charset: str | None) -> bytes:
    if element is None:
        return _ABSENT_KEY
    if element.is_sequence:
        return repr(element.items).encode("utf-8")
    if element.raw is not None:
        return element.raw
    return encode_value(element, charset)


def _sort_key(key: bytes) -> bytes:
    return b"" if key == _ABSENT_KEY else key


def _instance_number(ds: DataSet) -> int:
    value = ds.get_int(INSTANCE_NUMBER)
    return value if value is not None else 2**31


def _choose(members: Sequence[SeriesMember], keys: list[bytes]) -> bytes:
    counts = Counter(keys)
    best = max(counts.values())
    tied = {key for key, count in counts.items() if count == best}
    if len(tied) == 1:
        return next(iter(tied))
    ranked = sorted(
        (
            (_instance_number(member.dataset), _sort_key(key), key)
            for member, key in zip(members, keys, strict=True)
            if key in tied
        )
    )
    return ranked[0][2]


def harmonize(
    group: SeriesGroup, tags: Sequence[Tag] = DEFAULT_HARMONIZE_TAGS
) -> tuple[list[DataSet], HarmonizationReport]:
    if not tags:
        raise ValueError("harmonization tag list is empty")
    datasets = [member.dataset for member in group.members]
    report = HarmonizationReport(group.series_uid, len(datasets))
    if group.quarantined:
        return datasets, report

    for tag in tags:
        elements = [ds.get(tag) for ds in datasets]
        keys = [
            _value_key(element, ds.charset)
            for element, ds in zip(elements, datasets, strict=True)
        ]
        canonical_key = _choose(group.members, keys)
        template = next(
            (element for element, key in zip(elements, keys, strict=True) if key == canonical_key),
            None,
        )
        rewritten = 0
        for index, key in enumerate(keys):
            if key == canonical_key:
                continue
            rewritten += 1
            if template is None:
                datasets[index] = datasets[index].delete(tag)
            else:
                datasets[index] = datasets[index].set(template)
        report.tags.append(
            TagReport(
                tag=tag,
                observed=dict(Counter(keys)),
                canonical=None if canonical_key == _ABSENT_KEY else canonical_key,
                rewritten=rewritten,
            )
        )
        if rewritten:
            logger.info(
                "series attribute harmonized",
                extra={
                    "tag_path": str(tag),
                    "count": rewritten,
                    "series_key": _sha(group.series_uid.encode("utf-8"))[:16],
                },
            )
    for member, ds in zip(group.members, datasets, strict=True):
        member.dataset = ds
    return datasets, report


def find_inconsistencies(groups: Iterable[SeriesGroup], tags: Sequence[Tag]) -> int:
    """Instances whose value of a listed tag differs from their series majority."""
    findings = 0
    for group in groups:
        if group.quarantined:
            continue
        for tag in tags:
            keys = [
                _value_key(member.dataset.get(tag), member.dataset.charset)
                for member in group.members
            ]
            if not keys:
                continue
            canonical = _choose(group.members, keys)
            findings += sum(1 for key in keys if key != canonical)
    return findings
