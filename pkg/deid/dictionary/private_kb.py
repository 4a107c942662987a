"""Safe private attribute knowledge base.

Rows are ``private_creator,group_hex,element_offset_hex,vr_list,meaning``.
The element offset is the low byte of the private element; the high byte is
the block the creator reserved in the same group, so the same offset means
different things under different creators.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

from deid.codec.tags import VR, Tag
from deid.core.errors import CsvFormatError

_HEADER = ("private_creator", "group_hex", "element_offset_hex", "vr_list", "meaning")


@dataclass(frozen=True)
class SafePrivateEntry:
    private_creator: str
    group: int
    element_offset: int
    vrs: tuple[VR, ...]
    meaning: str = ""


def normalize_creator(creator: str) -> str:
    return creator.strip().upper()


class SafePrivateKB:
    def __init__(self, entries: list[SafePrivateEntry]):
        self._entries: dict[tuple[str, int, int], SafePrivateEntry] = {}
        for entry in entries:
            key = (normalize_creator(entry.private_creator), entry.group, entry.element_offset)
            self._entries[key] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def entry_for(self, creator: str, tag: Tag) -> SafePrivateEntry | None:
        if not tag.is_private or tag.private_block is None:
            return None
        return self._entries.get((normalize_creator(creator), tag.group, tag.element & 0xFF))

    def is_safe(self, creator: str, tag: Tag) -> bool:
        return self.entry_for(creator, tag) is not None


def _parse_vrs(text: str, line_number: int) -> tuple[VR, ...]:
    vrs: list[VR] = []
    for part in text.replace("|", "/").split("/"):
        part = part.strip()
        if not part:
            continue
        try:
            vrs.append(VR(part.upper()))
        except ValueError as exc:
            raise CsvFormatError(f"line {line_number}: unknown VR {part!r}") from exc
    return tuple(vrs)


def load_safe_private_kb(data: bytes) -> SafePrivateKB:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"safe private CSV is not UTF-8: {exc}") from exc

    entries: list[SafePrivateEntry] = []
    for line_number, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if line_number == 1 and tuple(cell.strip().lower() for cell in row) == _HEADER:
            continue
        if len(row) != len(_HEADER):
            raise CsvFormatError(
                f"line {line_number}: expected {len(_HEADER)} columns, got {len(row)}"
            )
        creator, group_hex, offset_hex, vr_list, meaning = (cell.strip() for cell in row)
        try:
            group = int(group_hex, 16)
            offset = int(offset_hex, 16)
        except ValueError as exc:
            raise CsvFormatError(f"line {line_number}: bad hex value") from exc
        if group % 2 == 0 or not 0 <= group <= 0xFFFF:
            raise CsvFormatError(f"line {line_number}: group {group_hex} is not a private group")
        if not 0 <= offset <= 0xFF:
            raise CsvFormatError(f"line {line_number}: element offset {offset_hex} out of range")
        if not creator:
            raise CsvFormatError(f"line {line_number}: empty private creator")
        entries.append(
            SafePrivateEntry(
                private_creator=creator,
                group=group,
                element_offset=offset,
                vrs=_parse_vrs(vr_list, line_number),
                meaning=meaning,
            )
        )
    return SafePrivateKB(entries)


def is_safe(kb: SafePrivateKB, creator: str, tag: Tag) -> bool:
    return kb.is_safe(creator, tag)


def default_safe_private_kb() -> SafePrivateKB:
    data = resources.files("deid.dictionary").joinpath("data/safe_private_sample.csv").read_bytes()
    return load_safe_private_kb(data)
