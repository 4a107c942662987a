"""In-memory model: elements, datasets and Part 10 objects.

Datasets are treated as values: ``set``/``delete`` return new datasets and
never touch the receiver, so parsed objects can be shared between threads.
Each parsed element keeps its original value bytes (``raw``); the writer
re-emits those bytes untouched, which is what makes an unmodified round trip
byte-exact.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace

from deid.codec.tags import VR, ElementPath, Tag
from deid.core.errors import VrMismatch

logger = logging.getLogger(__name__)

ElementValue = bytes | tuple[str, ...] | tuple["DataSet", ...]

SPECIFIC_CHARACTER_SET = Tag(0x0008, 0x0005)
TRANSFER_SYNTAX_UID = Tag(0x0002, 0x0010)
MEDIA_STORAGE_SOP_INSTANCE_UID = Tag(0x0002, 0x0003)


@dataclass(frozen=True, eq=False)
class DataElement:
    tag: Tag
    vr: VR
    value: ElementValue
    raw: bytes | None = None
    undefined_length: bool = False
    # VR written in an explicit header when it differs from ``vr`` (UN-wrapped sequences).
    header_vr: VR | None = None
    items_implicit: bool = False

    def __post_init__(self) -> None:
        if self.vr is VR.SQ and not (
            isinstance(self.value, tuple) and all(isinstance(item, DataSet) for item in self.value)
        ):
            raise ValueError(f"{self.tag}: VR SQ must hold sequence items")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataElement):
            return NotImplemented
        return self.tag == other.tag and self.vr == other.vr and self.value == other.value

    __hash__ = None  # type: ignore[assignment]

    @property
    def is_sequence(self) -> bool:
        return self.vr is VR.SQ

    @property
    def items(self) -> tuple[DataSet, ...]:
        if not self.is_sequence:
            return ()
        return self.value  # type: ignore[return-value]

    @property
    def strings(self) -> tuple[str, ...] | None:
        """Decoded string values, or None for binary / undecodable content."""
        if isinstance(self.value, tuple) and not self.is_sequence:
            return self.value  # type: ignore[return-value]
        return None

    @property
    def text(self) -> str | None:
        values = self.strings
        if values is None:
            return None
        return "\\".join(values)

    @property
    def is_empty(self) -> bool:
        if self.is_sequence:
            return len(self.items) == 0
        if isinstance(self.value, bytes):
            return len(self.value) == 0
        return all(not item for item in self.value)

    @property
    def is_modified(self) -> bool:
        return self.raw is None and not self.is_sequence

    def with_value(self, value: ElementValue, vr: VR | None = None) -> DataElement:
        return DataElement(tag=self.tag, vr=vr or self.vr, value=value)

    def with_items(self, items: Sequence[DataSet]) -> DataElement:
        return replace(self, value=tuple(items))


class DataSet:
    """Elements of one nesting level, ordered by tag."""

    __slots__ = ("_elements", "charset", "undefined_length")

    def __init__(
        self,
        elements: Iterable[DataElement] = (),
        *,
        charset: str | None = None,
        undefined_length: bool = False,
    ) -> None:
        mapping: dict[Tag, DataElement] = {}
        for element in elements:
            if element.tag in mapping:
                logger.warning("duplicate tag dropped", extra={"tag_path": str(element.tag)})
                continue
            mapping[element.tag] = element
        self._elements = dict(sorted(mapping.items()))
        self.charset = charset
        self.undefined_length = undefined_length

    def __iter__(self) -> Iterator[DataElement]:
        return iter(self._elements.values())

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, tag: object) -> bool:
        return tag in self._elements

    def __getitem__(self, tag: Tag) -> DataElement:
        return self._elements[tag]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataSet):
            return NotImplemented
        return list(self._elements.values()) == list(other._elements.values())

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DataSet({len(self)} elements)"

    def get(self, tag: Tag) -> DataElement | None:
        return self._elements.get(tag)

    def tags(self) -> list[Tag]:
        return list(self._elements)

    def get_text(self, tag: Tag) -> str | None:
        element = self._elements.get(tag)
        return element.text if element is not None else None

    def get_int(self, tag: Tag) -> int | None:
        """Integer value of an IS/US/UL/SS/SL element (first value)."""
        element = self._elements.get(tag)
        if element is None:
            return None
        if element.strings is not None:
            first = element.strings[0].strip() if element.strings else ""
            try:
                return int(first)
            except ValueError:
                return None
        raw = element.value if isinstance(element.value, bytes) else b""
        width = {VR.US: 2, VR.SS: 2, VR.UL: 4, VR.SL: 4}.get(element.vr)
        if width is None or len(raw) < width:
            return None
        signed = element.vr in (VR.SS, VR.SL)
        return int.from_bytes(raw[:width], "little", signed=signed)

    def set(self, element: DataElement) -> DataSet:
        elements = dict(self._elements)
        elements[element.tag] = element
        charset = self.charset
        if element.tag == SPECIFIC_CHARACTER_SET:
            charset = element.text
        return DataSet(
            elements.values(), charset=charset, undefined_length=self.undefined_length
        )

    def delete(self, tag: Tag) -> DataSet:
        if tag not in self._elements:
            return self
        elements = dict(self._elements)
        del elements[tag]
        return DataSet(
            elements.values(), charset=self.charset, undefined_length=self.undefined_length
        )

    def rebuild(self, elements: Iterable[DataElement]) -> DataSet:
        """New dataset with the same encoding context and different elements."""
        return DataSet(elements, charset=self.charset, undefined_length=self.undefined_length)


@dataclass(frozen=True)
class DicomObject:
    file_meta: DataSet
    dataset: DataSet
    transfer_syntax: str
    preamble: bytes | None = field(default=b"\x00" * 128)

    def with_dataset(self, dataset: DataSet) -> DicomObject:
        return replace(self, dataset=dataset)

    def with_file_meta(self, file_meta: DataSet) -> DicomObject:
        return replace(self, file_meta=file_meta)


ValueInput = str | Sequence[str] | bytes | Sequence["DataSet"]


def make_element(tag: Tag, vr: VR, value: ValueInput) -> DataElement:
    if vr is VR.SQ:
        items = tuple(value)  # type: ignore[arg-type]
        if not all(isinstance(item, DataSet) for item in items):
            raise TypeError(f"{tag}: sequence values must be DataSets")
        return DataElement(tag=tag, vr=vr, value=items)  # type: ignore[arg-type]
    if isinstance(value, bytes):
        return DataElement(tag=tag, vr=vr, value=value)
    if isinstance(value, str):
        strings: tuple[str, ...] = tuple(value.split("\\")) if vr.splits_on_backslash else (value,)
        if value == "":
            strings = ()
        return DataElement(tag=tag, vr=vr, value=strings)
    return DataElement(tag=tag, vr=vr, value=tuple(str(item) for item in value))


def get_path(ds: DataSet, path: ElementPath) -> DataElement | None:
    current = ds
    for seq_tag, index in path.steps:
        element = current.get(seq_tag)
        if element is None or not element.is_sequence:
            return None
        items = element.items
        if index < 0 or index >= len(items):
            return None
        current = items[index]
    return current.get(path.tag)


def set_element(
    ds: DataSet,
    tag: Tag,
    vr: VR,
    value: ValueInput,
    *,
    allow_vr_mismatch: bool = False,
) -> DataSet:
    from deid.dictionary.standard import lookup

    entry = lookup(tag)
    if entry is not None and vr is not VR.UN and vr not in entry.vrs:
        message = f"{tag} {entry.keyword}: dictionary VR {'/'.join(entry.vrs)}, got {vr}"
        if not allow_vr_mismatch:
            raise VrMismatch(message)
        logger.warning("VR mismatch overridden", extra={"tag_path": str(tag), "reason": message})
    return ds.set(make_element(tag, vr, value))


def delete_element(ds: DataSet, tag: Tag) -> DataSet:
    return ds.delete(tag)


def walk(ds: DataSet) -> Iterator[tuple[ElementPath, DataElement]]:
    """Depth-first visit of every element, sequence items included, in tag order."""
    return _walk(ds, None)


def _walk(
    ds: DataSet, parent: tuple[ElementPath, int] | None
) -> Iterator[tuple[ElementPath, DataElement]]:
    for element in ds:
        if parent is None:
            path = ElementPath.of(element.tag)
        else:
            path = parent[0].child(parent[1], element.tag)
        yield path, element
        for index, item in enumerate(element.items):
            yield from _walk(item, (path, index))
