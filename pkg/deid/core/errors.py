from dataclasses import dataclass
from typing import Any


@dataclass
class ErrorEnvelope:
    code: str
    message: str
    type: str
    file_id: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "error": {
                "code": self.code,
                "message": self.message,
                "type": self.type,
                "file_id": self.file_id,
            }
        }


class DeidError(Exception):
    code = "deid_error"
    error_type = "internal"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def envelope(self, file_id: str) -> ErrorEnvelope:
        return ErrorEnvelope(
            code=self.code, message=self.message, type=self.error_type, file_id=file_id
        )


# -- codec -------------------------------------------------------------------


class CodecError(DeidError):
    code = "codec_error"
    error_type = "codec"


class MalformedFile(CodecError):
    code = "malformed_file"


class TruncatedElement(CodecError):
    code = "truncated_element"


class UnevenLength(CodecError):
    code = "uneven_length"


class NestingTooDeep(CodecError):
    code = "nesting_too_deep"


class UnsupportedTransferSyntax(CodecError):
    code = "unsupported_transfer_syntax"


class ValueTooLong(CodecError):
    code = "value_too_long"


class OddLengthUnpaddable(CodecError):
    code = "odd_length_unpaddable"


class VrMismatch(CodecError):
    code = "vr_mismatch"


# -- dictionary --------------------------------------------------------------


class DictionaryError(DeidError):
    code = "dictionary_error"
    error_type = "dictionary"


class ActionTableParseError(DictionaryError):
    code = "action_table_parse_error"

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateTag(DictionaryError):
    code = "duplicate_tag"


class CsvFormatError(DictionaryError):
    code = "csv_format_error"


# -- profile -----------------------------------------------------------------


class ProfileError(DeidError):
    code = "profile_error"
    error_type = "profile"


class ConflictingOverride(ProfileError):
    code = "conflicting_override"


class InvalidUid(ProfileError):
    code = "invalid_uid"


class InvalidProfile(ProfileError):
    code = "invalid_profile"


# -- pipeline / scoring ------------------------------------------------------


class ConfigError(DeidError):
    code = "config_error"
    error_type = "config"


class PixelMaskError(DeidError):
    error_type = "pixel_mask"


class UnsupportedPixelFormat(PixelMaskError):
    code = "unsupported_pixel_format"


class MaskOutOfBounds(PixelMaskError):
    code = "mask_out_of_bounds"


class UnknownCategory(DeidError):
    code = "unknown_category"
    error_type = "scoring"


class DuplicateOutput(DeidError):
    code = "duplicate_output"
    error_type = "pipeline"


class MissingOutput(DeidError):
    code = "missing_output"
    error_type = "scoring"
