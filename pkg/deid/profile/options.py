"""Confidentiality profile options and their provenance codes."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from deid.core.errors import InvalidProfile

# (field name, profile-string token, method-string label, CID 7050 code, code meaning)
_OPTION_TABLE: tuple[tuple[str, str, str, str, str], ...] = (
    ("clean_descriptors", "cleandesc", "CleanDescriptors", "113105", "Clean Descriptors Option"),
    (
        "retain_full_dates",
        "retainfulldates",
        "RetainLongFullDates",
        "113106",
        "Retain Longitudinal Temporal Information Full Dates Option",
    ),
    (
        "retain_modified_dates",
        "retainmodifieddates",
        "RetainLongModifiedDates",
        "113107",
        "Retain Longitudinal Temporal Information Modified Dates Option",
    ),
    (
        "retain_patient_characteristics",
        "retainpatientchars",
        "RetainPatientChars",
        "113108",
        "Retain Patient Characteristics Option",
    ),
    (
        "retain_device_identity",
        "retaindeviceident",
        "RetainDeviceIdent",
        "113109",
        "Retain Device Identity Option",
    ),
    ("retain_uids", "retainuids", "RetainUIDs", "113110", "Retain UIDs Option"),
    (
        "retain_safe_private",
        "retainsafeprivate",
        "RetainSafePrivate",
        "113111",
        "Retain Safe Private Option",
    ),
    (
        "retain_institution_identity",
        "retaininstitutionident",
        "RetainInstitutionIdent",
        "113112",
        "Retain Institution Identity Option",
    ),
)

BASIC_PROFILE_CODE = ("113100", "Basic Application Confidentiality Profile")
BASIC_METHOD_LABEL = "BasicProfile"

_TOKEN_TO_FIELD = {token: name for name, token, _, _, _ in _OPTION_TABLE}
_PRESETS: dict[str, tuple[str, ...]] = {
    "midi": (
        "clean_descriptors",
        "retain_safe_private",
        "retain_patient_characteristics",
        "retain_modified_dates",
    ),
}


class ProfileOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    clean_descriptors: bool = False
    retain_safe_private: bool = False
    retain_uids: bool = False
    retain_full_dates: bool = False
    retain_modified_dates: bool = False
    date_shift_days: int | None = None
    retain_patient_characteristics: bool = False
    retain_device_identity: bool = False
    retain_institution_identity: bool = False
    insert_missing_type2: bool = False

    @model_validator(mode="after")
    def _dates_exclusive(self) -> ProfileOptions:
        if self.retain_full_dates and self.retain_modified_dates:
            raise ValueError("retain_full_dates and retain_modified_dates are mutually exclusive")
        return self

    @classmethod
    def from_profile_string(cls, text: str, **extra: object) -> ProfileOptions:
        """Parse ``basic+cleandesc+retainsafeprivate`` style strings (or the ``midi`` preset)."""
        fields: dict[str, object] = dict(extra)
        tokens = [token.strip().lower() for token in text.split("+") if token.strip()]
        if not tokens:
            raise InvalidProfile("empty profile string")
        for token in tokens:
            if token == "basic":
                continue
            if token in _PRESETS:
                fields.update({name: True for name in _PRESETS[token]})
            elif token in _TOKEN_TO_FIELD:
                fields[_TOKEN_TO_FIELD[token]] = True
            elif token == "inserttype2":
                fields["insert_missing_type2"] = True
            else:
                raise InvalidProfile(f"unknown profile option {token!r}")
        try:
            return cls.model_validate(fields)
        except ValidationError as exc:
            raise InvalidProfile(str(exc)) from exc

    def enabled(self, option: str) -> bool:
        return bool(getattr(self, option, False))

    @property
    def method_labels(self) -> list[str]:
        labels = [BASIC_METHOD_LABEL]
        labels.extend(label for name, _, label, _, _ in _OPTION_TABLE if self.enabled(name))
        return labels

    @property
    def method_string(self) -> str:
        return "+".join(self.method_labels)

    @property
    def method_codes(self) -> list[tuple[str, str]]:
        codes = [BASIC_PROFILE_CODE]
        codes.extend(
            (code, meaning) for name, _, _, code, meaning in _OPTION_TABLE if self.enabled(name)
        )
        return codes

    @property
    def profile_string(self) -> str:
        tokens = ["basic"]
        tokens.extend(token for name, token, _, _, _ in _OPTION_TABLE if self.enabled(name))
        if self.insert_missing_type2:
            tokens.append("inserttype2")
        return "+".join(tokens)


def split_method_string(method: str, limit: int = 64) -> list[str]:
    """Split a method string at ``+`` boundaries into values of at most ``limit`` characters."""
    values: list[str] = []
    current = ""
    for label in method.split("+"):
        candidate = f"{current}+{label}" if current else label
        if len(candidate) <= limit:
            current = candidate
            continue
        if current:
            values.append(current)
        current = label
    if current:
        values.append(current)
    return values
