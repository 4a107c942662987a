"""Part 10 serializer.

Unmodified primitive elements are written from their retained ``raw`` bytes.
Sequence and item lengths are always recomputed from their contents, and
group length elements outside the file meta group are dropped.
"""

from __future__ import annotations

import logging
import struct
from collections.abc import Callable

from deid.codec.charset import python_codec
from deid.codec.dataset import (
    SPECIFIC_CHARACTER_SET,
    TRANSFER_SYNTAX_UID,
    DataElement,
    DataSet,
    DicomObject,
    make_element,
)
from deid.codec.syntax import UNDECODABLE_SYNTAXES, UNDEFINED_LENGTH, is_implicit
from deid.codec.tags import ITEM, ITEM_DELIMITER, SEQUENCE_DELIMITER, VR, Tag
from deid.codec.validation import ValidationIssue, validate_dataset
from deid.core.errors import OddLengthUnpaddable, UnsupportedTransferSyntax, ValueTooLong

logger = logging.getLogger(__name__)

_TAG_STRUCT = struct.Struct("<HH")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_META_GROUP_LENGTH = Tag(0x0002, 0x0000)

IssueHandler = Callable[[ValidationIssue], None]


def _log_issue(issue: ValidationIssue) -> None:
    logger.warning(
        "value failed validation",
        extra={"tag_path": issue.path, "reason": f"{issue.code}: {issue.message}"},
    )


def serialize(obj: DicomObject, *, on_issue: IssueHandler | None = None) -> bytes:
    """Encode a DicomObject to Part 10 bytes.

    Modified string values are validated first; format problems are reported
    through ``on_issue`` (logged by default), over-long values raise
    ValueTooLong.
    """
    if obj.transfer_syntax in UNDECODABLE_SYNTAXES:
        raise UnsupportedTransferSyntax(f"cannot encode transfer syntax {obj.transfer_syntax}")

    out = bytearray()
    if obj.preamble is not None:
        out += obj.preamble.ljust(128, b"\x00")[:128]
        out += b"DICM"
    out += _encode_meta(obj)
    out += serialize_dataset(obj.dataset, obj.transfer_syntax, on_issue=on_issue)
    return bytes(out)


def serialize_dataset(
    ds: DataSet, transfer_syntax: str, *, on_issue: IssueHandler | None = None
) -> bytes:
    if transfer_syntax in UNDECODABLE_SYNTAXES:
        raise UnsupportedTransferSyntax(f"cannot encode transfer syntax {transfer_syntax}")
    handler = on_issue or _log_issue
    for issue in validate_dataset(ds, modified_only=True):
        if issue.code == "value_too_long":
            raise ValueTooLong(f"{issue.path}: {issue.message}")
        handler(issue)
    return _encode_dataset(ds, implicit=is_implicit(transfer_syntax), charset=ds.charset)


def _encode_meta(obj: DicomObject) -> bytes:
    meta = obj.file_meta
    current = meta.get(TRANSFER_SYNTAX_UID)
    if current is None or current.text != obj.transfer_syntax:
        meta = meta.set(make_element(TRANSFER_SYNTAX_UID, VR.UI, obj.transfer_syntax))
    body = b"".join(
        _encode_element(element, implicit=False, charset=None)
        for element in meta
        if element.tag != _META_GROUP_LENGTH
    )
    if _META_GROUP_LENGTH not in meta:
        return body
    header = _TAG_STRUCT.pack(0x0002, 0x0000) + b"UL" + _U16.pack(4) + _U32.pack(len(body))
    return header + body


def _encode_dataset(ds: DataSet, *, implicit: bool, charset: str | None) -> bytes:
    out = bytearray()
    for element in ds:
        if element.tag.is_group_length and element.tag.group != 0x0002:
            continue
        if element.tag == SPECIFIC_CHARACTER_SET:
            charset = element.text
        out += _encode_element(element, implicit=implicit, charset=charset)
    return bytes(out)


def _header(tag: Tag, vr: VR, length: int, *, implicit: bool) -> bytes:
    prefix = _TAG_STRUCT.pack(tag.group, tag.element)
    if implicit:
        return prefix + _U32.pack(length)
    if vr.has_long_length:
        return prefix + vr.value.encode("ascii") + b"\x00\x00" + _U32.pack(length)
    if length > 0xFFFF:
        raise ValueTooLong(f"{tag}: {length} bytes does not fit a {vr} header")
    return prefix + vr.value.encode("ascii") + _U16.pack(length)


def _encode_element(element: DataElement, *, implicit: bool, charset: str | None) -> bytes:
    if element.is_sequence:
        return _encode_sequence(element, implicit=implicit, charset=charset)
    if element.undefined_length:
        # Encapsulated pixel data: raw already ends with the sequence delimiter.
        value = element.raw if element.raw is not None else _as_bytes(element)
        return _header(element.tag, element.vr, UNDEFINED_LENGTH, implicit=implicit) + value
    value = element.raw if element.raw is not None else encode_value(element, charset)
    return _header(element.tag, element.vr, len(value), implicit=implicit) + value


def _encode_sequence(element: DataElement, *, implicit: bool, charset: str | None) -> bytes:
    items_implicit = implicit or element.items_implicit
    body = bytearray()
    for item in element.items:
        item_charset = item.charset if item.charset is not None else charset
        content = _encode_dataset(item, implicit=items_implicit, charset=item_charset)
        if item.undefined_length:
            body += _TAG_STRUCT.pack(ITEM.group, ITEM.element) + _U32.pack(UNDEFINED_LENGTH)
            body += content
            body += _TAG_STRUCT.pack(ITEM_DELIMITER.group, ITEM_DELIMITER.element) + _U32.pack(0)
        else:
            body += _TAG_STRUCT.pack(ITEM.group, ITEM.element) + _U32.pack(len(content))
            body += content
    header_vr = element.header_vr or VR.SQ
    if element.undefined_length:
        body += _TAG_STRUCT.pack(SEQUENCE_DELIMITER.group, SEQUENCE_DELIMITER.element)
        body += _U32.pack(0)
        return _header(element.tag, header_vr, UNDEFINED_LENGTH, implicit=implicit) + bytes(body)
    return _header(element.tag, header_vr, len(body), implicit=implicit) + bytes(body)


def _as_bytes(element: DataElement) -> bytes:
    if isinstance(element.value, bytes):
        return element.value
    raise TypeError(f"{element.tag}: expected bytes for VR {element.vr}")


def encode_value(element: DataElement, charset: str | None) -> bytes:
    """Encode a modified value, padding to even length."""
    vr = element.vr
    if isinstance(element.value, bytes):
        data = element.value
        if len(data) % 2 == 1:
            if vr in (VR.OB, VR.UN) or vr.is_text:
                return data + vr.pad_byte
            raise OddLengthUnpaddable(f"{element.tag}: {len(data)} bytes of VR {vr}")
        return data
    strings = element.strings or ()
    text = "\\".join(strings)
    if vr is VR.UI or element.tag == SPECIFIC_CHARACTER_SET:
        codec = "ascii"
    else:
        codec = python_codec(charset) or "utf_8"
    try:
        data = text.encode(codec)
    except UnicodeEncodeError:
        logger.warning(
            "value not representable in character set; encoded as UTF-8",
            extra={"tag_path": str(element.tag), "reason": codec},
        )
        data = text.encode("utf_8")
    if len(data) % 2 == 1:
        data += vr.pad_byte
    return data
