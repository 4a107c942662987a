"""Value-format checks run before serialization."""

import re
from dataclasses import dataclass
from datetime import date

from deid.codec.dataset import DataSet, walk
from deid.codec.tags import VR

_DA_RE = re.compile(r"^\d{8}$")
_TM_RE = re.compile(r"^([01]\d|2[0-3])([0-5]\d([0-5]\d(\.\d{1,6})?)?)?$")
_DT_RE = re.compile(r"^\d{4}(\d{2}(\d{2}(\d{2}(\d{2}(\d{2}(\.\d{1,6})?)?)?)?)?)?([+-]\d{4})?$")
_AS_RE = re.compile(r"^\d{3}[DWMY]$")
_UI_RE = re.compile(r"^[0-9]+(\.[0-9]+)*$")
_IS_RE = re.compile(r"^\s*[+-]?\d+\s*$")
_DS_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")
_CS_RE = re.compile(r"^[A-Z0-9 _]*$")


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    vr: VR
    code: str
    message: str


def _valid_date(value: str) -> bool:
    if not _DA_RE.match(value):
        return False
    try:
        date(int(value[:4]), int(value[4:6]), int(value[6:8]))
    except ValueError:
        return False
    return True


def _check_format(vr: VR, value: str) -> str | None:
    if not value:
        return None
    if vr is VR.DA and not _valid_date(value):
        return "not a YYYYMMDD date"
    if vr is VR.TM and not _TM_RE.match(value.rstrip()):
        return "not a HHMMSS.FFFFFF time"
    if vr is VR.DT and not _DT_RE.match(value.rstrip()):
        return "not a date-time"
    if vr is VR.AS and not _AS_RE.match(value):
        return "not an nnnD/W/M/Y age"
    if vr is VR.UI and not _UI_RE.match(value):
        return "not a dotted-decimal UID"
    if vr is VR.IS and not _IS_RE.match(value):
        return "not an integer string"
    if vr is VR.DS and not _DS_RE.match(value):
        return "not a decimal string"
    if vr is VR.CS and not _CS_RE.match(value):
        return "not a code string"
    return None


def _too_long(vr: VR, value: str) -> bool:
    limit = vr.max_length
    if limit is None:
        return False
    if vr is VR.PN:
        return any(len(group) > limit for group in value.split("="))
    return len(value) > limit


def validate_dataset(ds: DataSet, *, modified_only: bool = False) -> list[ValidationIssue]:
    """Format and length problems of every string value, nested items included."""
    issues: list[ValidationIssue] = []
    for path, element in walk(ds):
        values = element.strings
        if values is None:
            continue
        if modified_only and not element.is_modified:
            continue
        for value in values:
            if _too_long(element.vr, value):
                issues.append(
                    ValidationIssue(
                        str(path),
                        element.vr,
                        "value_too_long",
                        f"{len(value)} characters exceeds {element.vr.max_length}",
                    )
                )
            problem = _check_format(element.vr, value)
            if problem is not None:
                issues.append(
                    ValidationIssue(str(path), element.vr, "bad_format", f"{value!r}: {problem}")
                )
    return issues
