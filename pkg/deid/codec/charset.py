import logging

logger = logging.getLogger(__name__)

DEFAULT_CHARSET = "ISO_IR 6"

# Default repertoire decodes as latin-1 so that stray high bytes survive a round trip.
_CODECS: dict[str, str] = {
    "": "latin_1",
    "ISO_IR 6": "latin_1",
    "ISO 2022 IR 6": "latin_1",
    "ISO_IR 100": "latin_1",
    "ISO 2022 IR 100": "latin_1",
    "ISO_IR 192": "utf_8",
}


def python_codec(specific_character_set: str | None) -> str | None:
    """Return the Python codec for a (0008,0005) value, or None when unsupported."""
    if specific_character_set is None:
        return _CODECS[""]
    # Multi-valued charsets (code extensions) fall back to the first term.
    first = specific_character_set.split("\\")[0].strip()
    codec = _CODECS.get(first)
    if codec is None:
        logger.warning(
            "unsupported character set; text left as raw bytes",
            extra={"reason": first or "empty"},
        )
    return codec
