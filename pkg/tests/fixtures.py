"""Byte-level DICOM builders for tests.

Independent of ``deid.codec``: everything here is assembled with ``struct`` so
the codec is checked against bytes it did not produce.
"""

from __future__ import annotations

import struct
from typing import Any

EXPLICIT_LE = "1.2.840.10008.1.2.1"
IMPLICIT_LE = "1.2.840.10008.1.2"
BIG_ENDIAN = "1.2.840.10008.1.2.2"
CT_IMAGE_STORAGE = "1.2.840.10008.5.1.4.1.1.2"
SECONDARY_CAPTURE = "1.2.840.10008.5.1.4.1.1.7"

# (group, element) -> (VR, value); SQ values are lists of nested element dicts.
Elements = dict[tuple[int, int], tuple[str, Any]]

_LONG_VRS = {"OB", "OD", "OF", "OL", "OV", "OW", "SQ", "SV", "UC", "UN", "UR", "UT", "UV"}
_UNDEFINED = 0xFFFFFFFF


def _data(vr: str, value: bytes | str) -> bytes:
    data = value if isinstance(value, bytes) else value.encode("latin-1")
    if len(data) % 2:
        data += b"\x00" if vr in ("UI", "OB", "UN") else b" "
    return data


def us(*values: int) -> bytes:
    return struct.pack(f"<{len(values)}H", *values)


def explicit(group: int, element: int, vr: str, value: bytes | str) -> bytes:
    data = _data(vr, value)
    head = struct.pack("<HH", group, element) + vr.encode("ascii")
    if vr in _LONG_VRS:
        head += b"\x00\x00" + struct.pack("<I", len(data))
    else:
        head += struct.pack("<H", len(data))
    return head + data


def implicit(group: int, element: int, vr: str, value: bytes | str) -> bytes:
    data = _data(vr, value)
    return struct.pack("<HHI", group, element, len(data)) + data


def item(content: bytes, *, undefined: bool = False) -> bytes:
    if undefined:
        return struct.pack("<HHI", 0xFFFE, 0xE000, _UNDEFINED) + content + struct.pack(
            "<HHI", 0xFFFE, 0xE00D, 0
        )
    return struct.pack("<HHI", 0xFFFE, 0xE000, len(content)) + content


def sequence(
    group: int,
    element: int,
    items: list[bytes],
    *,
    implicit_vr: bool = False,
    undefined: bool = False,
    vr: str = "SQ",
) -> bytes:
    body = b"".join(items)
    length = _UNDEFINED if undefined else len(body)
    if implicit_vr:
        head = struct.pack("<HHI", group, element, length)
    else:
        head = struct.pack("<HH", group, element) + vr.encode("ascii") + b"\x00\x00"
        head += struct.pack("<I", length)
    tail = struct.pack("<HHI", 0xFFFE, 0xE0DD, 0) if undefined else b""
    return head + body + tail


def encode(elements: Elements, *, implicit_vr: bool = False) -> bytes:
    out = bytearray()
    for group, element in sorted(elements):
        vr, value = elements[(group, element)]
        if vr == "SQ":
            items = [item(encode(child, implicit_vr=implicit_vr)) for child in value]
            out += sequence(group, element, items, implicit_vr=implicit_vr)
        elif implicit_vr:
            out += implicit(group, element, vr, value)
        else:
            out += explicit(group, element, vr, value)
    return bytes(out)


def part10(
    dataset: bytes,
    *,
    transfer_syntax: str = EXPLICIT_LE,
    sop_class: str = CT_IMAGE_STORAGE,
    sop_instance: str = "1.2.826.0.1.3680043.8.498.1",
    preamble: bool = True,
) -> bytes:
    body = (
        explicit(0x0002, 0x0001, "OB", b"\x00\x01")
        + explicit(0x0002, 0x0002, "UI", sop_class)
        + explicit(0x0002, 0x0003, "UI", sop_instance)
        + explicit(0x0002, 0x0010, "UI", transfer_syntax)
        + explicit(0x0002, 0x0012, "UI", "1.2.826.0.1.3680043.8.498")
    )
    meta = explicit(0x0002, 0x0000, "UL", struct.pack("<I", len(body))) + body
    prefix = b"\x00" * 128 + b"DICM" if preamble else b""
    return prefix + meta + dataset


def ct_elements(
    *,
    patient_name: str = "DOE^JOHN",
    patient_id: str = "PID12345",
    study_uid: str = "1.2.826.0.1.3680043.8.498.10",
    series_uid: str = "1.2.826.0.1.3680043.8.498.11",
    sop_uid: str = "1.2.826.0.1.3680043.8.498.1",
    sop_class: str = CT_IMAGE_STORAGE,
    series_description: str = "CHEST AXIAL",
    series_number: str = "3",
    instance_number: str = "1",
    image_comments: str | None = None,
    rows: int = 4,
    columns: int = 4,
) -> Elements:
    elements: Elements = {
        (0x0008, 0x0005): ("CS", "ISO_IR 100"),
        (0x0008, 0x0016): ("UI", sop_class),
        (0x0008, 0x0018): ("UI", sop_uid),
        (0x0008, 0x0020): ("DA", "20200315"),
        (0x0008, 0x0030): ("TM", "101500"),
        (0x0008, 0x0050): ("SH", "ACC778899"),
        (0x0008, 0x0060): ("CS", "CT"),
        (0x0008, 0x0080): ("LO", "GENERAL HOSPITAL"),
        (0x0008, 0x0090): ("PN", "SMITH^ALAN"),
        (0x0008, 0x1030): ("LO", "CHEST SURVEY"),
        (0x0008, 0x103E): ("LO", series_description),
        (0x0010, 0x0010): ("PN", patient_name),
        (0x0010, 0x0020): ("LO", patient_id),
        (0x0010, 0x0030): ("DA", "19600101"),
        (0x0010, 0x0040): ("CS", "M"),
        (0x0010, 0x1010): ("AS", "060Y"),
        (0x0020, 0x000D): ("UI", study_uid),
        (0x0020, 0x000E): ("UI", series_uid),
        (0x0020, 0x0011): ("IS", series_number),
        (0x0020, 0x0013): ("IS", instance_number),
        (0x0028, 0x0002): ("US", us(1)),
        (0x0028, 0x0004): ("CS", "MONOCHROME2"),
        (0x0028, 0x0010): ("US", us(rows)),
        (0x0028, 0x0011): ("US", us(columns)),
        (0x0028, 0x0100): ("US", us(16)),
        (0x0028, 0x0101): ("US", us(12)),
        (0x0028, 0x0102): ("US", us(11)),
        (0x0028, 0x0103): ("US", us(0)),
        (0x7FE0, 0x0010): ("OW", us(*([1000] * (rows * columns)))),
    }
    if image_comments is not None:
        elements[(0x0020, 0x4000)] = ("LT", image_comments)
    return elements


def ct_file(*, implicit_vr: bool = False, elements: Elements | None = None, **kwargs: Any) -> bytes:
    """A complete Part 10 CT image; keyword arguments go to ``ct_elements``."""
    data = elements if elements is not None else ct_elements(**kwargs)
    sop_class = data[(0x0008, 0x0016)][1]
    sop_uid = data[(0x0008, 0x0018)][1]
    return part10(
        encode(data, implicit_vr=implicit_vr),
        transfer_syntax=IMPLICIT_LE if implicit_vr else EXPLICIT_LE,
        sop_class=sop_class,
        sop_instance=sop_uid,
    )
