"""Standard data dictionary lookups backed by pydicom's PS3.6 tables."""

from dataclasses import dataclass
from functools import lru_cache

from pydicom.datadict import DicomDictionary, get_entry

from deid.codec.tags import VR, Tag


@dataclass(frozen=True)
class DictEntry:
    tag: Tag
    keyword: str
    vrs: tuple[VR, ...]
    vm: str
    # True when the entry came from a repeating-group mask such as (60xx,3000).
    is_pattern: bool = False

    @property
    def vr(self) -> VR:
        return self.vrs[0]


def _parse_vrs(text: str) -> tuple[VR, ...]:
    vrs: list[VR] = []
    for part in text.split(" or "):
        try:
            vrs.append(VR(part.strip()))
        except ValueError:
            continue
    return tuple(vrs)


@lru_cache(maxsize=8192)
def _lookup(value: int) -> DictEntry | None:
    tag = Tag.from_int(value)
    if tag.is_group_length:
        return DictEntry(tag=tag, keyword=f"GroupLength{tag.group:04X}", vrs=(VR.UL,), vm="1")
    if tag.is_private:
        if tag.is_private_creator:
            return DictEntry(tag=tag, keyword="PrivateCreator", vrs=(VR.LO,), vm="1")
        return None
    try:
        vr_text, vm, _name, _retired, keyword = get_entry(value)
    except KeyError:
        return None
    vrs = _parse_vrs(vr_text)
    if not vrs:
        return None
    return DictEntry(
        tag=tag,
        keyword=keyword,
        vrs=vrs,
        vm=vm,
        is_pattern=value not in DicomDictionary,
    )


def lookup(tag: Tag) -> DictEntry | None:
    """Exact dictionary entry first, then repeating-group patterns; None when unknown."""
    return _lookup(int(tag))


def keyword_for(tag: Tag) -> str:
    entry = lookup(tag)
    return entry.keyword if entry is not None else ""
