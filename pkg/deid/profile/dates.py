"""Per-patient date shifting for the modified-dates option."""

import hashlib
import hmac
from datetime import date, timedelta

from deid.codec.tags import VR

MAX_SHIFT_DAYS = 365


def date_shift_days_for(patient_id: str, salt: bytes) -> int:
    """Deterministic offset in [-365, -1] days derived from the patient ID."""
    digest = hmac.new(salt, patient_id.strip().encode("utf-8"), hashlib.sha256).digest()
    return -(int.from_bytes(digest[:8], "big") % MAX_SHIFT_DAYS) - 1


def _shift_ymd(text: str, days: int) -> str:
    """Shift a YYYY[MM[DD]] prefix, keeping its precision."""
    year = int(text[:4])
    month = int(text[4:6]) if len(text) >= 6 else 1
    day = int(text[6:8]) if len(text) >= 8 else 1
    shifted = date(year, month, day) + timedelta(days=days)
    return f"{shifted.year:04d}{shifted.month:02d}{shifted.day:02d}"[: len(text)]


def shift_date_value(value: str, vr: VR, days: int) -> str | None:
    """Shifted DA/DT value, or None when the value does not parse or leaves the calendar."""
    text = value.strip()
    if not text:
        return value
    if vr is VR.DA:
        if len(text) != 8 or not text.isdigit():
            return None
        try:
            return _shift_ymd(text, days)
        except (ValueError, OverflowError):
            return None
    if vr is VR.DT:
        digits = 0
        while digits < min(len(text), 8) and text[digits].isdigit():
            digits += 1
        if digits not in (4, 6, 8):
            return None
        try:
            return _shift_ymd(text[:digits], days) + text[digits:]
        except (ValueError, OverflowError):
            return None
    return value
