"""Batch pipeline: filter, harmonize, deidentify, clean, write.

Pass 1 reads headers only (parsing stops at Pixel Data), applies the SOP
class filter and harmonizes each series, keeping just the harmonized tag
values per file. Pass 2 runs on a bounded worker pool: it re-reads each
accepted file, applies the harmonized values, deidentifies and writes one
output. Every input ends up written, rejected, failed, or (after a halt)
not attempted.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any
from uuid import uuid4

from deid.audit.writer import AuditWriter
from deid.cleaning.context import CleanContext
from deid.cleaning.rules import load_rule_extensions
from deid.codec.dataset import DataElement, DataSet, DicomObject
from deid.codec.reader import parse_file
from deid.codec.syntax import ParseLimits
from deid.codec.tags import Tag
from deid.codec.validation import ValidationIssue
from deid.codec.writer import serialize
from deid.config.settings import Settings, get_settings
from deid.core.errors import DeidError, DuplicateOutput, ErrorEnvelope
from deid.dictionary.actions import load_action_table
from deid.dictionary.policy import load_required_type2, load_type_policy
from deid.dictionary.private_kb import load_safe_private_kb
from deid.harmonize.series import (
    INSTANCE_NUMBER,
    SERIES_INSTANCE_UID,
    find_inconsistencies,
    group_by_series,
    harmonize,
)
from deid.pipeline.config import JobConfig
from deid.pipeline.filters import filter_sop_class
from deid.pipeline.masks import PIXEL_DATA, apply_pixel_masks
from deid.profile.compose import Profile
from deid.profile.engine import SOP_INSTANCE_UID, apply_profile
from deid.profile.options import ProfileOptions
from deid.profile.uid_map import UidMap

logger = logging.getLogger(__name__)

SUMMARY_FILE_NAME = "run_summary.json"


@dataclass
class RunSummary:
    run_id: str
    files_in: int = 0
    written: int = 0
    rejected: int = 0
    failed: int = 0
    not_attempted: int = 0
    harmonized_instances: int = 0
    inconsistencies_before: int = 0
    inconsistencies_after: int = 0
    outputs: list[Path] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 1

    def count(self, status: str) -> None:
        with self._lock:
            setattr(self, status, getattr(self, status) + 1)

    def as_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "files_in": self.files_in,
            "written": self.written,
            "rejected": self.rejected,
            "failed": self.failed,
            "not_attempted": self.not_attempted,
            "harmonized_instances": self.harmonized_instances,
            "inconsistencies_before": self.inconsistencies_before,
            "inconsistencies_after": self.inconsistencies_after,
            "exit_code": self.exit_code,
        }


@dataclass
class _Accepted:
    path: Path
    relative: Path
    file_id: str
    header: DataSet
    # Harmonized values by tag; None means the tag is removed.
    overrides: dict[Tag, DataElement | None] = field(default_factory=dict)

    def apply_overrides(self, ds: DataSet) -> DataSet:
        for tag, element in self.overrides.items():
            ds = ds.delete(tag) if element is None else ds.set(element)
        return ds


def file_id_for(relative: Path) -> str:
    return hashlib.sha256(relative.as_posix().encode("utf-8")).hexdigest()[:16]


def discover_inputs(root: Path) -> list[Path]:
    """Regular files under ``root``, hidden files and directories skipped, sorted."""
    if not root.is_dir():
        return []
    found = []
    for path in root.rglob("*"):
        relative = path.relative_to(root)
        if any(part.startswith(".") for part in relative.parts):
            continue
        if path.is_file():
            found.append(path)
    return sorted(found)


def build_profile(config: JobConfig) -> Profile:
    section = config.profile
    options = ProfileOptions.from_profile_string(
        section.options, date_shift_days=section.date_shift_days
    )
    return Profile.build(
        options,
        action_table=(
            load_action_table(section.action_table.read_text(encoding="utf-8"))
            if section.action_table
            else None
        ),
        policy=(
            load_type_policy(section.type_policy.read_text(encoding="utf-8"))
            if section.type_policy
            else None
        ),
        safe_private=(
            load_safe_private_kb(section.safe_private_csv.read_bytes())
            if section.safe_private_csv
            else None
        ),
        required_type2=(
            load_required_type2(section.type2_required.read_text(encoding="utf-8"))
            if section.type2_required
            else None
        ),
    )


class PipelineRun:
    def __init__(self, config: JobConfig, settings: Settings | None = None):
        self.config = config
        self.settings = settings or get_settings()
        self.run_id = str(uuid4())
        self.summary = RunSummary(run_id=self.run_id)
        self.audit = AuditWriter(self.settings, config.audit_log_path)
        self.profile = build_profile(config)
        salt = config.salt().get_secret_value().encode("utf-8")
        self._salt = salt
        self.uid_map = UidMap(config.uid_root, salt)
        if config.uid_map_path is not None:
            self.uid_map.load(config.uid_map_path)
        self.limits = ParseLimits(
            max_depth=self.settings.parse_max_depth,
            max_element_length=self.settings.parse_max_element_length,
        )
        self.extensions = (
            load_rule_extensions(config.clean.rules_file) if config.clean.rules_file else ()
        )
        self._halt = threading.Event()
        self._claimed: set[Path] = set()
        self._claim_lock = threading.Lock()

    # -- audit helpers -------------------------------------------------------

    def _event(self, event_type: str, **fields: Any) -> None:
        payload = {"event_type": event_type, "run_id": self.run_id}
        payload.update({key: value for key, value in fields.items() if value is not None})
        self.audit.write_event(payload)

    def _fail(self, file_id: str, exc: Exception) -> None:
        if isinstance(exc, DeidError):
            envelope = exc.envelope(file_id)
        elif isinstance(exc, OSError):
            envelope = ErrorEnvelope(
                code="io_error", message=str(exc.strerror or exc), type="io", file_id=file_id
            )
        else:
            # Only the class name: messages of arbitrary errors may quote element values.
            envelope = ErrorEnvelope(
                code="internal_error", message=type(exc).__name__, type="internal", file_id=file_id
            )
        logger.warning(
            "file failed", extra={"file_id": file_id, "status": "failed", "reason": envelope.code}
        )
        self.summary.count("failed")
        self._event("file_failed", file_id=file_id, error=envelope.as_dict()["error"])
        if self.config.failure_policy == "halt":
            self._halt.set()

    def _reject(self, file_id: str, reason: str) -> None:
        logger.info(
            "file rejected",
            extra={"file_id": file_id, "status": "rejected", "reason": reason},
        )
        self.summary.count("rejected")
        self._event("file_rejected", file_id=file_id, reason=reason)

    # -- pass 1 --------------------------------------------------------------

    def _parse_all(self, inputs: list[Path]) -> list[_Accepted]:
        accepted: list[_Accepted] = []
        for index, path in enumerate(inputs):
            if self._halt.is_set():
                self.summary.not_attempted += len(inputs) - index
                break
            relative = path.relative_to(self.config.input_root)
            file_id = file_id_for(relative)
            try:
                header = parse_file(path.read_bytes(), self.limits, stop_before=PIXEL_DATA)
                decision = filter_sop_class(header, self.config.sop_class)
            except Exception as exc:
                self._fail(file_id, exc)
                continue
            if not decision.keep:
                self._reject(file_id, decision.reason or "filtered")
                continue
            accepted.append(_Accepted(path, relative, file_id, self._harmonize_view(header)))
        return accepted

    def _harmonize_view(self, header: DicomObject) -> DataSet:
        keep = {SERIES_INSTANCE_UID, INSTANCE_NUMBER, *self.config.harmonize.tag_list}
        ds = header.dataset
        return DataSet((element for element in ds if element.tag in keep), charset=ds.charset)

    def _harmonize(self, accepted: list[_Accepted]) -> None:
        if not self.config.harmonize.enabled or not accepted:
            return
        tags: list[Tag] = self.config.harmonize.tag_list
        by_id = {item.file_id: item for item in accepted}
        groups = group_by_series((item.file_id, item.header) for item in accepted)
        self.summary.inconsistencies_before = find_inconsistencies(groups, tags)
        for group in groups:
            _, report = harmonize(group, tags)
            for member in group.members:
                item = by_id[member.file_id]
                for tag in tags:
                    element = member.dataset.get(tag)
                    if element is not item.header.get(tag):
                        item.overrides[tag] = element
                item.header = member.dataset
            if report.rewritten:
                self.summary.harmonized_instances += report.rewritten
                self._event("harmonization", harmonization=report.as_audit_dict())
        self.summary.inconsistencies_after = find_inconsistencies(groups, tags)

    # -- pass 2 --------------------------------------------------------------

    def _output_path(self, item: _Accepted, obj: DicomObject) -> Path:
        sop = obj.dataset.get_text(SOP_INSTANCE_UID)
        if sop:
            name = f"{sop}.dcm"
        else:
            digest = hashlib.sha256(self._salt + item.relative.as_posix().encode("utf-8"))
            name = f"{digest.hexdigest()[:32]}.dcm"
        return self.config.output_root / item.relative.parent / name

    def _process(self, item: _Accepted) -> None:
        if self._halt.is_set():
            self.summary.count("not_attempted")
            return
        started = time.perf_counter()
        try:
            obj = parse_file(item.path.read_bytes(), self.limits)
            obj = obj.with_dataset(item.apply_overrides(obj.dataset))
            for spec in self.config.pixel_masks:
                if spec.applies_to(obj.dataset):
                    obj = apply_pixel_masks(obj, spec)
            clean_ctx = CleanContext.from_dataset(
                obj.dataset,
                extra_tokens=self.config.clean.extra_tokens,
                triggers=self.config.clean.triggers,
                address_keywords=self.config.clean.address_keywords,
                replacement=self.config.clean.replacement,
                extensions=self.extensions,
            )
            result, records = apply_profile(
                obj, self.profile, self.uid_map, clean_ctx, salt=self._salt
            )
            issues: list[ValidationIssue] = []
            data = serialize(result, on_issue=issues.append)
            target = self._output_path(item, result)
            with self._claim_lock:
                if target in self._claimed:
                    raise DuplicateOutput(
                        f"output name {target.name} already produced in this run"
                    )
                self._claimed.add(target)
            if not self.config.dry_run:
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(data)
        except Exception as exc:
            self._fail(item.file_id, exc)
            return

        self.summary.count("written")
        with self.summary._lock:
            self.summary.outputs.append(target)
        self._event(
            "file_written",
            file_id=item.file_id,
            output_name=target.relative_to(self.config.output_root).as_posix(),
            profile=self.profile.options.profile_string,
            records=[record.as_dict() for record in records],
            validation_issues=[{"path": issue.path, "code": issue.code} for issue in issues]
            or None,
        )
        logger.info(
            "file written",
            extra={
                "file_id": item.file_id,
                "status": "written",
                "count": len(records),
                "duration_ms": round((time.perf_counter() - started) * 1000, 2),
            },
        )

    # -- orchestration -------------------------------------------------------

    def execute(self) -> RunSummary:
        inputs = discover_inputs(self.config.input_root)
        self.summary.files_in = len(inputs)
        accepted = self._parse_all(inputs)
        self._harmonize(accepted)
        if self._halt.is_set():
            self.summary.not_attempted += len(accepted)
        else:
            with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
                list(pool.map(self._process, accepted))

        if self.config.uid_map_path is not None and not self.config.dry_run:
            self.uid_map.save(self.config.uid_map_path)
        self._event("run_summary", summary=self.summary.as_dict())
        summary_path = self.audit.log_path.parent / SUMMARY_FILE_NAME
        summary_path.parent.mkdir(parents=True, exist_ok=True)
        summary_path.write_text(
            json.dumps(self.summary.as_dict(), indent=2) + "\n", encoding="utf-8"
        )
        logger.info(
            "run complete",
            extra={
                "status": "done",
                "count": self.summary.written,
                "exit_code": self.summary.exit_code,
            },
        )
        return self.summary


def run(config: JobConfig, settings: Settings | None = None) -> RunSummary:
    return PipelineRun(config, settings).execute()
