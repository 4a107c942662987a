"""Part 10 parser for little-endian transfer syntaxes.

Every primitive element keeps its value bytes in ``raw``. Encapsulated pixel
data (undefined length OB/OW) is carried as one opaque blob that includes its
fragment items and the closing sequence delimiter.
"""

from __future__ import annotations

import logging
import struct

from deid.codec.charset import python_codec
from deid.codec.dataset import (
    SPECIFIC_CHARACTER_SET,
    TRANSFER_SYNTAX_UID,
    DataElement,
    DataSet,
    DicomObject,
)
from deid.codec.syntax import (
    UNDECODABLE_SYNTAXES,
    UNDEFINED_LENGTH,
    ParseLimits,
    is_implicit,
)
from deid.codec.tags import ITEM, ITEM_DELIMITER, SEQUENCE_DELIMITER, VR, Tag
from deid.core.errors import (
    MalformedFile,
    NestingTooDeep,
    TruncatedElement,
    UnevenLength,
    UnsupportedTransferSyntax,
)

logger = logging.getLogger(__name__)

_PREAMBLE_LENGTH = 128
_MAGIC = b"DICM"
_TAG_STRUCT = struct.Struct("<HH")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")


def parse_file(
    data: bytes, limits: ParseLimits | None = None, *, stop_before: Tag | None = None
) -> DicomObject:
    """Parse a Part 10 file (preamble, DICM, group 0002 meta, dataset).

    With ``stop_before`` the top-level dataset ends at the first tag at or past it,
    which gives a header-only object.
    """
    limits = limits or ParseLimits()
    magic = data[_PREAMBLE_LENGTH : _PREAMBLE_LENGTH + 4]
    if len(data) >= _PREAMBLE_LENGTH + 4 and magic == _MAGIC:
        preamble: bytes | None = bytes(data[:_PREAMBLE_LENGTH])
        position = _PREAMBLE_LENGTH + 4
    elif len(data) >= 2 and _U16.unpack_from(data, 0)[0] == 0x0002:
        logger.warning("no preamble; reading file meta from offset 0")
        preamble = None
        position = 0
    else:
        raise MalformedFile("missing DICM prefix and no file meta group at offset 0")

    reader = _Reader(data, implicit=False, limits=limits)
    file_meta, position = reader.read_meta(position)

    syntax_element = file_meta.get(TRANSFER_SYNTAX_UID)
    transfer_syntax = syntax_element.text if syntax_element is not None else None
    if not transfer_syntax:
        raise MalformedFile("file meta has no (0002,0010) TransferSyntaxUID")
    _check_syntax(transfer_syntax)

    reader = _Reader(data, implicit=is_implicit(transfer_syntax), limits=limits)
    dataset, _ = reader.read_dataset(
        position, len(data), depth=0, charset=None, in_item=False, stop_before=stop_before
    )
    return DicomObject(
        file_meta=file_meta,
        dataset=dataset,
        transfer_syntax=transfer_syntax,
        preamble=preamble,
    )


def parse_dataset(
    data: bytes, transfer_syntax: str, limits: ParseLimits | None = None
) -> DataSet:
    """Parse a bare dataset encoded in ``transfer_syntax``."""
    _check_syntax(transfer_syntax)
    reader = _Reader(data, implicit=is_implicit(transfer_syntax), limits=limits or ParseLimits())
    dataset, _ = reader.read_dataset(0, len(data), depth=0, charset=None, in_item=False)
    return dataset


def _check_syntax(transfer_syntax: str) -> None:
    if transfer_syntax in UNDECODABLE_SYNTAXES:
        raise UnsupportedTransferSyntax(f"transfer syntax {transfer_syntax} is not supported")


def _implicit_vr(tag: Tag) -> VR:
    from deid.dictionary.standard import lookup

    entry = lookup(tag)
    if entry is None:
        return VR.UN
    # Implicit little endian pixel data and LUT data are OW.
    if VR.OW in entry.vrs and len(entry.vrs) > 1:
        return VR.OW
    return entry.vrs[0]


class _Reader:
    def __init__(self, data: bytes, *, implicit: bool, limits: ParseLimits) -> None:
        self._data = data
        self._implicit = implicit
        self._limits = limits

    # -- primitives ----------------------------------------------------------

    def _need(self, position: int, count: int, what: str) -> None:
        if position + count > len(self._data):
            raise TruncatedElement(
                f"{what} at offset {position} needs {count} bytes, "
                f"{max(len(self._data) - position, 0)} available"
            )

    def _tag_at(self, position: int) -> Tag:
        self._need(position, 4, "tag")
        group, element = _TAG_STRUCT.unpack_from(self._data, position)
        return Tag(group, element)

    # -- file meta -----------------------------------------------------------

    def read_meta(self, position: int) -> tuple[DataSet, int]:
        elements: list[DataElement] = []
        while position + 4 <= len(self._data) and self._tag_at(position).group == 0x0002:
            element, position = self._read_element(position, depth=0, charset=None, implicit=False)
            elements.append(element)
        if not elements:
            raise MalformedFile("empty file meta group")
        return DataSet(elements), position

    # -- datasets and sequences ---------------------------------------------

    def read_dataset(
        self,
        position: int,
        end: int | None,
        *,
        depth: int,
        charset: str | None,
        in_item: bool,
        implicit: bool | None = None,
        stop_before: Tag | None = None,
    ) -> tuple[DataSet, int]:
        """Read elements until ``end`` or, when ``end`` is None, an item delimiter."""
        implicit = self._implicit if implicit is None else implicit
        elements: list[DataElement] = []
        previous: Tag | None = None
        while True:
            if end is not None and position >= end:
                break
            if end is None and position >= len(self._data):
                raise TruncatedElement("item with undefined length is missing its delimiter")
            tag = self._tag_at(position)
            if stop_before is not None and tag >= stop_before:
                break
            if tag == ITEM_DELIMITER:
                if not in_item or end is not None:
                    raise MalformedFile(f"unexpected item delimiter at offset {position}")
                position += 8
                break
            element, position = self._read_element(
                position, depth=depth, charset=charset, implicit=implicit
            )
            if element.tag == SPECIFIC_CHARACTER_SET:
                charset = element.text
            if previous is not None and element.tag <= previous:
                logger.warning(
                    "element out of order or repeated",
                    extra={"tag_path": str(element.tag), "reason": f"after {previous}"},
                )
            previous = element.tag
            elements.append(element)
        if end is not None and position > end:
            raise TruncatedElement(f"element overruns its container ending at offset {end}")
        return DataSet(elements, charset=charset, undefined_length=end is None), position

    def _read_items(
        self,
        position: int,
        end: int | None,
        *,
        depth: int,
        charset: str | None,
        implicit: bool,
    ) -> tuple[list[DataSet], int]:
        if depth > self._limits.max_depth:
            raise NestingTooDeep(f"sequence nesting exceeds {self._limits.max_depth} levels")
        items: list[DataSet] = []
        while True:
            if end is not None and position >= end:
                break
            tag = self._tag_at(position)
            self._need(position, 8, "item header")
            length = _U32.unpack_from(self._data, position + 4)[0]
            if tag == SEQUENCE_DELIMITER:
                position += 8
                if end is not None:
                    logger.warning("sequence delimiter inside defined-length sequence")
                break
            if tag != ITEM:
                raise MalformedFile(f"expected item tag at offset {position}, found {tag}")
            start = position + 8
            if length == UNDEFINED_LENGTH:
                item, position = self.read_dataset(
                    start, None, depth=depth, charset=charset, in_item=True, implicit=implicit
                )
            else:
                self._need(start, length, f"item of {length} bytes")
                item, _ = self.read_dataset(
                    start,
                    start + length,
                    depth=depth,
                    charset=charset,
                    in_item=True,
                    implicit=implicit,
                )
                position = start + length
            items.append(item)
        return items, position

    def _read_encapsulated(self, position: int) -> int:
        """Skip fragment items up to and including the sequence delimiter."""
        while True:
            tag = self._tag_at(position)
            self._need(position, 8, "fragment header")
            length = _U32.unpack_from(self._data, position + 4)[0]
            if tag == SEQUENCE_DELIMITER:
                return position + 8
            if tag != ITEM or length == UNDEFINED_LENGTH:
                raise MalformedFile(f"bad encapsulated fragment at offset {position}")
            self._need(position + 8, length, f"fragment of {length} bytes")
            position += 8 + length

    # -- elements ------------------------------------------------------------

    def _read_element(
        self, position: int, *, depth: int, charset: str | None, implicit: bool
    ) -> tuple[DataElement, int]:
        tag = self._tag_at(position)
        header_vr: VR | None = None
        if implicit:
            self._need(position, 8, f"{tag} header")
            length = _U32.unpack_from(self._data, position + 4)[0]
            vr = _implicit_vr(tag)
            start = position + 8
        else:
            self._need(position, 8, f"{tag} header")
            code = bytes(self._data[position + 4 : position + 6])
            try:
                vr = VR(code.decode("ascii"))
            except (UnicodeDecodeError, ValueError) as exc:
                raise MalformedFile(f"{tag}: unknown VR {code!r} at offset {position + 4}") from exc
            if vr.has_long_length:
                self._need(position, 12, f"{tag} header")
                length = _U32.unpack_from(self._data, position + 8)[0]
                start = position + 12
            else:
                length = _U16.unpack_from(self._data, position + 6)[0]
                start = position + 8

        if length == UNDEFINED_LENGTH:
            if vr is VR.SQ or vr is VR.UN:
                items_implicit = implicit or vr is VR.UN
                if vr is VR.UN and not implicit:
                    header_vr = VR.UN
                items, end = self._read_items(
                    start, None, depth=depth + 1, charset=charset, implicit=items_implicit
                )
                element = DataElement(
                    tag=tag,
                    vr=VR.SQ,
                    value=tuple(items),
                    undefined_length=True,
                    header_vr=header_vr,
                    items_implicit=items_implicit and not implicit,
                )
                return element, end
            if vr in (VR.OB, VR.OW):
                end = self._read_encapsulated(start)
                blob = bytes(self._data[start:end])
                return DataElement(tag=tag, vr=vr, value=blob, raw=blob, undefined_length=True), end
            raise MalformedFile(f"{tag}: undefined length on VR {vr}")

        if length > self._limits.max_element_length:
            raise TruncatedElement(
                f"{tag}: declared length {length} exceeds limit {self._limits.max_element_length}"
            )
        self._need(start, length, f"{tag} value of {length} bytes")
        end = start + length

        if vr is VR.SQ:
            items, _ = self._read_items(
                start, end, depth=depth + 1, charset=charset, implicit=implicit
            )
            return DataElement(tag=tag, vr=VR.SQ, value=tuple(items)), end

        if length % 2 == 1:
            if not self._limits.allow_odd_length:
                raise UnevenLength(f"{tag}: odd value length {length}")
            logger.warning("odd value length accepted", extra={"tag_path": str(tag)})

        raw = bytes(self._data[start:end])
        return DataElement(tag=tag, vr=vr, value=decode_value(vr, raw, charset, tag), raw=raw), end


def decode_value(
    vr: VR, raw: bytes, charset: str | None, tag: Tag | None = None
) -> bytes | tuple[str, ...]:
    """Decode value bytes: text VRs become string tuples, everything else stays bytes."""
    if not vr.is_text:
        return raw
    if vr is VR.UI or tag == SPECIFIC_CHARACTER_SET:
        codec: str | None = "latin_1"
    else:
        codec = python_codec(charset)
    if codec is None:
        return raw
    try:
        text = raw.decode(codec)
    except UnicodeDecodeError:
        logger.warning("undecodable text left as bytes", extra={"tag_path": str(tag)})
        return raw
    text = text.rstrip("\x00 ")
    if not text:
        return ()
    if vr.splits_on_backslash:
        return tuple(text.split("\\"))
    return (text,)
