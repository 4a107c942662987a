from dataclasses import dataclass

IMPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2"
EXPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2.1"
DEFLATED_EXPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2.1.99"
EXPLICIT_VR_BIG_ENDIAN = "1.2.840.10008.1.2.2"

UNCOMPRESSED_SYNTAXES = frozenset({IMPLICIT_VR_LITTLE_ENDIAN, EXPLICIT_VR_LITTLE_ENDIAN})

# Syntaxes whose dataset bytes cannot be walked as little-endian elements.
UNDECODABLE_SYNTAXES = frozenset({DEFLATED_EXPLICIT_VR_LITTLE_ENDIAN, EXPLICIT_VR_BIG_ENDIAN})

UNDEFINED_LENGTH = 0xFFFFFFFF


@dataclass(frozen=True)
class ParseLimits:
    max_depth: int = 16
    max_element_length: int = 2**31
    allow_odd_length: bool = False


def is_implicit(transfer_syntax: str) -> bool:
    return transfer_syntax == IMPLICIT_VR_LITTLE_ENDIAN


def is_uncompressed(transfer_syntax: str) -> bool:
    return transfer_syntax in UNCOMPRESSED_SYNTAXES
