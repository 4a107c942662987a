"""Tags, value representations and nested element paths."""

import re
from dataclasses import dataclass
from enum import StrEnum

_TAG_RE = re.compile(r"^\(?\s*([0-9A-Fa-f]{4})\s*,\s*([0-9A-Fa-f]{4})\s*\)?$")
_PATH_STEP_RE = re.compile(r"\(([0-9A-Fa-f]{4}),([0-9A-Fa-f]{4})\)(?:\[(\d+)\])?")


@dataclass(frozen=True, order=True)
class Tag:
    group: int
    element: int

    def __post_init__(self) -> None:
        if not (0 <= self.group <= 0xFFFF and 0 <= self.element <= 0xFFFF):
            raise ValueError(f"tag components out of range: {self.group:#x},{self.element:#x}")

    @classmethod
    def parse(cls, text: str) -> "Tag":
        match = _TAG_RE.match(text.strip())
        if match is None:
            raise ValueError(f"not a tag: {text!r}")
        return cls(int(match.group(1), 16), int(match.group(2), 16))

    @classmethod
    def from_int(cls, value: int) -> "Tag":
        return cls(value >> 16, value & 0xFFFF)

    def __int__(self) -> int:
        return (self.group << 16) | self.element

    def __str__(self) -> str:
        return f"({self.group:04X},{self.element:04X})"

    @property
    def is_private(self) -> bool:
        return self.group % 2 == 1

    @property
    def is_private_creator(self) -> bool:
        return self.is_private and 0x0010 <= self.element <= 0x00FF

    @property
    def is_group_length(self) -> bool:
        return self.element == 0x0000

    @property
    def private_block(self) -> int | None:
        """High byte of a private data element, i.e. the creator block it binds to."""
        if not self.is_private or self.element < 0x1000:
            return None
        return self.element >> 8

    @property
    def creator_tag(self) -> "Tag | None":
        block = self.private_block
        if block is None:
            return None
        return Tag(self.group, block)


# Item and delimitation tags.
ITEM = Tag(0xFFFE, 0xE000)
ITEM_DELIMITER = Tag(0xFFFE, 0xE00D)
SEQUENCE_DELIMITER = Tag(0xFFFE, 0xE0DD)


class VR(StrEnum):
    AE = "AE"
    AS = "AS"
    AT = "AT"
    CS = "CS"
    DA = "DA"
    DS = "DS"
    DT = "DT"
    FL = "FL"
    FD = "FD"
    IS = "IS"
    LO = "LO"
    LT = "LT"
    OB = "OB"
    OD = "OD"
    OF = "OF"
    OL = "OL"
    OV = "OV"
    OW = "OW"
    PN = "PN"
    SH = "SH"
    SL = "SL"
    SQ = "SQ"
    SS = "SS"
    ST = "ST"
    SV = "SV"
    TM = "TM"
    UC = "UC"
    UI = "UI"
    UL = "UL"
    UN = "UN"
    UR = "UR"
    US = "US"
    UT = "UT"
    UV = "UV"

    @property
    def has_long_length(self) -> bool:
        """True when explicit VR encoding uses the 2 reserved bytes + 4-byte length form."""
        return self in _LONG_LENGTH_VRS

    @property
    def is_text(self) -> bool:
        return self in TEXT_VRS

    @property
    def max_length(self) -> int | None:
        return _MAX_LENGTH.get(self)

    @property
    def splits_on_backslash(self) -> bool:
        return self.is_text and self not in _SINGLE_VALUED_TEXT

    @property
    def pad_byte(self) -> bytes:
        if self is VR.UI or not self.is_text:
            return b"\x00"
        return b" "


_LONG_LENGTH_VRS = frozenset(
    {VR.OB, VR.OD, VR.OF, VR.OL, VR.OV, VR.OW, VR.SQ, VR.SV, VR.UC, VR.UN, VR.UR, VR.UT, VR.UV}
)

TEXT_VRS = frozenset(
    {
        VR.AE,
        VR.AS,
        VR.CS,
        VR.DA,
        VR.DS,
        VR.DT,
        VR.IS,
        VR.LO,
        VR.LT,
        VR.PN,
        VR.SH,
        VR.ST,
        VR.TM,
        VR.UC,
        VR.UI,
        VR.UR,
        VR.UT,
    }
)

# Free-text VRs a Clean action can operate on.
CLEANABLE_VRS = frozenset({VR.LO, VR.LT, VR.PN, VR.SH, VR.ST, VR.UC, VR.UT})

_SINGLE_VALUED_TEXT = frozenset({VR.LT, VR.ST, VR.UT, VR.UR})

# Per-value character limits (PS3.5 Table 6.2-1); PN is per component group.
_MAX_LENGTH: dict[VR, int] = {
    VR.AE: 16,
    VR.AS: 4,
    VR.CS: 16,
    VR.DA: 8,
    VR.DS: 16,
    VR.DT: 26,
    VR.IS: 12,
    VR.LO: 64,
    VR.LT: 10240,
    VR.PN: 64,
    VR.SH: 16,
    VR.ST: 1024,
    VR.TM: 14,
    VR.UI: 64,
}

BINARY_WIDTH: dict[VR, int] = {
    VR.AT: 4,
    VR.FL: 4,
    VR.FD: 8,
    VR.OB: 1,
    VR.OD: 8,
    VR.OF: 4,
    VR.OL: 4,
    VR.OV: 8,
    VR.OW: 2,
    VR.SL: 4,
    VR.SS: 2,
    VR.SV: 8,
    VR.UL: 4,
    VR.UN: 1,
    VR.US: 2,
    VR.UV: 8,
}


@dataclass(frozen=True)
class ElementPath:
    """Location of an element: zero or more (sequence tag, item index) steps, then a tag."""

    steps: tuple[tuple[Tag, int], ...]
    tag: Tag

    @classmethod
    def of(cls, tag: Tag) -> "ElementPath":
        return cls(steps=(), tag=tag)

    @classmethod
    def parse(cls, text: str) -> "ElementPath":
        parts = text.strip().split(".")
        steps: list[tuple[Tag, int]] = []
        for index, part in enumerate(parts):
            match = _PATH_STEP_RE.fullmatch(part.strip())
            if match is None:
                raise ValueError(f"bad path component {part!r} in {text!r}")
            tag = Tag(int(match.group(1), 16), int(match.group(2), 16))
            item = match.group(3)
            last = index == len(parts) - 1
            if last:
                if item is not None:
                    raise ValueError(f"path must end in a tag: {text!r}")
                return cls(steps=tuple(steps), tag=tag)
            if item is None:
                raise ValueError(f"sequence step without item index in {text!r}")
            steps.append((tag, int(item)))
        raise ValueError(f"empty path: {text!r}")

    def child(self, item_index: int, tag: Tag) -> "ElementPath":
        return ElementPath(steps=(*self.steps, (self.tag, item_index)), tag=tag)

    @property
    def depth(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        rendered = [f"{seq}[{index}]" for seq, index in self.steps]
        rendered.append(str(self.tag))
        return ".".join(rendered)
