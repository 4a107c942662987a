"""Job configuration: TOML file, environment, then CLI overrides."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, SecretStr, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict, TomlConfigSettingsSource

from deid.codec.dataset import DataSet
from deid.codec.tags import Tag
from deid.config.settings import get_settings
from deid.core.errors import ConfigError

SOP_CLASS_UID = Tag(0x0008, 0x0016)
SERIES_INSTANCE_UID = Tag(0x0020, 0x000E)

# Secondary Capture family: the usual carriers of burned-in annotations.
SECONDARY_CAPTURE_SOP_CLASSES: tuple[str, ...] = (
    "1.2.840.10008.5.1.4.1.1.7",
    "1.2.840.10008.5.1.4.1.1.7.1",
    "1.2.840.10008.5.1.4.1.1.7.2",
    "1.2.840.10008.5.1.4.1.1.7.3",
    "1.2.840.10008.5.1.4.1.1.7.4",
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProfileSection(_Section):
    options: str = "basic"
    date_shift_days: int | None = Field(default=None, ge=-36500, le=36500)
    action_table: Path | None = None
    safe_private_csv: Path | None = None
    type_policy: Path | None = None
    type2_required: Path | None = None


class CleanSection(_Section):
    triggers: list[str] = Field(default_factory=lambda: sorted(get_settings().clean_trigger_set))
    extra_tokens: list[str] = Field(default_factory=list)
    address_keywords: list[str] = Field(
        default_factory=lambda: sorted(get_settings().clean_address_keyword_set)
    )
    rules_file: Path | None = None
    replacement: str = ""


class HarmonizeSection(_Section):
    enabled: bool = True
    tags: list[str] = Field(default_factory=lambda: ["(0008,103E)", "(0020,0011)"])

    @property
    def tag_list(self) -> list[Tag]:
        return [Tag.parse(item) for item in self.tags]

    @model_validator(mode="after")
    def _tags_parse(self) -> HarmonizeSection:
        for item in self.tags:
            Tag.parse(item)
        if self.enabled and not self.tags:
            raise ValueError("harmonize.tags must not be empty when harmonization is enabled")
        return self


class SopClassSection(_Section):
    mode: Literal["allow", "deny"] = "deny"
    uids: list[str] = Field(default_factory=lambda: list(SECONDARY_CAPTURE_SOP_CLASSES))

    @property
    def uid_set(self) -> set[str]:
        return {uid.strip() for uid in self.uids if uid.strip()}


class PixelMaskSpec(_Section):
    selector: Literal["all", "sop_class", "series"] = "all"
    match: str = ""
    rectangles: list[tuple[int, int, int, int]] = Field(default_factory=list)
    fill: int = 0

    @model_validator(mode="after")
    def _check(self) -> PixelMaskSpec:
        if self.selector != "all" and not self.match:
            raise ValueError(f"pixel mask selector {self.selector!r} needs a match UID")
        for x, y, width, height in self.rectangles:
            if min(x, y, width, height) < 0:
                raise ValueError(f"negative rectangle component in {(x, y, width, height)}")
        return self

    def applies_to(self, ds: DataSet) -> bool:
        if self.selector == "all":
            return True
        tag = SOP_CLASS_UID if self.selector == "sop_class" else SERIES_INSTANCE_UID
        return ds.get_text(tag) == self.match


class JobConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="DEID_JOB_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )

    input_root: Path
    output_root: Path
    uid_map_path: Path | None = None
    uid_root: str = Field(default_factory=lambda: get_settings().uid_root)
    salt_env: str = "DEID_SALT"
    failure_policy: Literal["halt", "skip"] = "skip"
    jobs: int = Field(default_factory=lambda: get_settings().default_jobs, ge=1, le=256)
    dry_run: bool = False
    audit_log_path: Path | None = None

    profile: ProfileSection = Field(default_factory=ProfileSection)
    clean: CleanSection = Field(default_factory=CleanSection)
    harmonize: HarmonizeSection = Field(default_factory=HarmonizeSection)
    sop_class: SopClassSection = Field(default_factory=SopClassSection)
    pixel_masks: list[PixelMaskSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _distinct_roots(self) -> JobConfig:
        source = self.input_root.resolve()
        target = self.output_root.resolve()
        if source == target or source in target.parents:
            raise ValueError("output_root must not be the input root or inside it")
        return self

    def salt(self) -> SecretStr:
        """The hashing salt, read from the environment variable named by ``salt_env``."""
        value = os.environ.get(self.salt_env, "")
        if not value:
            raise ConfigError(f"environment variable {self.salt_env} is empty or unset")
        return SecretStr(value)

    @classmethod
    def load(cls, path: Path | None = None, overrides: dict[str, Any] | None = None) -> JobConfig:
        data: dict[str, Any] = {}
        if path is not None:
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                data = TomlConfigSettingsSource(cls, toml_file=path)()
            except ValueError as exc:
                raise ConfigError(f"cannot read {path}: {exc}") from exc
        given = {key: value for key, value in (overrides or {}).items() if value is not None}
        merged = _deep_merge(data, given)
        try:
            return cls(**merged)
        except ValidationError as exc:
            raise ConfigError(_format_validation(exc)) from exc


def _deep_merge(base: dict[str, Any], top: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in top.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"]) or "config"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)
