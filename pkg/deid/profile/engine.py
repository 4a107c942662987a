"""Apply a composed confidentiality profile to one object.

Order of work: strip unsafe private attributes, walk the dataset applying
the effective table (recursing into every sequence that survives), insert
missing Type 2 attributes, write the deidentification markers, then sync the
file meta SOP Instance UID.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

from deid.cleaning.context import PATIENT_ID, CleanContext
from deid.cleaning.engine import clean_text
from deid.codec.dataset import (
    MEDIA_STORAGE_SOP_INSTANCE_UID,
    DataElement,
    DataSet,
    DicomObject,
    make_element,
)
from deid.codec.tags import CLEANABLE_VRS, VR, ElementPath, Tag
from deid.core.errors import InvalidUid
from deid.dictionary.private_kb import SafePrivateKB
from deid.dictionary.standard import lookup
from deid.profile.compose import Profile, ResolvedAction
from deid.profile.dates import date_shift_days_for, shift_date_value
from deid.profile.dummies import dummy_value_for
from deid.profile.options import ProfileOptions, split_method_string
from deid.profile.uid_map import UidMap

logger = logging.getLogger(__name__)

SOP_INSTANCE_UID = Tag(0x0008, 0x0018)
PATIENT_IDENTITY_REMOVED = Tag(0x0012, 0x0062)
DEIDENTIFICATION_METHOD = Tag(0x0012, 0x0063)
DEIDENTIFICATION_METHOD_CODE_SEQUENCE = Tag(0x0012, 0x0064)
CODE_VALUE = Tag(0x0008, 0x0100)
CODING_SCHEME_DESIGNATOR = Tag(0x0008, 0x0102)
CODE_MEANING = Tag(0x0008, 0x0104)

# Values under the DICOM root name classes, syntaxes and contexts, not instances.
DICOM_UID_ROOT = "1.2.840.10008."
# Class and coding-scheme UIDs, which may carry vendor or registry OIDs.
UNTABLED_KEPT_UIDS = frozenset(
    {Tag(0x0008, 0x0016), Tag(0x0008, 0x0062), Tag(0x0008, 0x010C), Tag(0x0008, 0x1150)}
)

# Scoring category for each applied action.
CATEGORY: dict[ResolvedAction, str] = {
    ResolvedAction.REMOVE: "remove",
    ResolvedAction.ZERO: "remove",
    ResolvedAction.DUMMY: "replace_dummy",
    ResolvedAction.REMAP_UID: "remap_uid",
    ResolvedAction.CLEAN: "text_remove",
    ResolvedAction.KEEP: "retain",
    ResolvedAction.SHIFT_DATE: "date_action",
}


@dataclass(frozen=True)
class AuditRecord:
    path: str
    action: str
    original_present: bool
    category: str
    rule_ids: tuple[str, ...] = ()
    original_hash: str | None = None
    error: str | None = None

    def as_dict(self) -> dict[str, object]:
        payload: dict[str, object] = {
            "path": self.path,
            "action": self.action,
            "original_present": self.original_present,
            "category": self.category,
        }
        if self.rule_ids:
            payload["rule_ids"] = list(self.rule_ids)
        if self.original_hash is not None:
            payload["original_hash"] = self.original_hash
        if self.error is not None:
            payload["error"] = self.error
        return payload


def value_hash(element: DataElement) -> str | None:
    if element.is_sequence:
        return None
    if element.raw is not None:
        data = element.raw
    elif isinstance(element.value, bytes):
        data = element.value
    else:
        data = "\\".join(element.strings or ()).encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def _path(parent: tuple[ElementPath, int] | None, tag: Tag) -> ElementPath:
    if parent is None:
        return ElementPath.of(tag)
    return parent[0].child(parent[1], tag)


def _record(
    records: list[AuditRecord] | None,
    path: ElementPath,
    action: ResolvedAction | str,
    element: DataElement | None,
    *,
    rule_ids: tuple[str, ...] = (),
    error: str | None = None,
) -> None:
    if records is None:
        return
    resolved = action if isinstance(action, ResolvedAction) else None
    records.append(
        AuditRecord(
            path=str(path),
            action=str(action),
            original_present=element is not None,
            category=CATEGORY[resolved] if resolved is not None else "remove",
            rule_ids=rule_ids,
            original_hash=value_hash(element) if element is not None else None,
            error=error,
        )
    )


def _empty_value(vr: VR) -> str | bytes | tuple[DataSet, ...]:
    if vr is VR.SQ:
        return ()
    if vr.is_text:
        return ""
    return b""


# -- private attributes ------------------------------------------------------


def strip_unsafe_private(
    ds: DataSet,
    kb: SafePrivateKB | None,
    enabled: bool,
    *,
    records: list[AuditRecord] | None = None,
) -> DataSet:
    """Delete private attributes not listed safe; drop creators left without elements."""
    return _strip_private(ds, kb if enabled else None, None, records)


def _strip_private(
    ds: DataSet,
    kb: SafePrivateKB | None,
    parent: tuple[ElementPath, int] | None,
    records: list[AuditRecord] | None,
) -> DataSet:
    creators: dict[tuple[int, int], str] = {}
    for element in ds:
        if element.tag.is_private_creator:
            creators[(element.tag.group, element.tag.element)] = element.text or ""

    kept_blocks: set[tuple[int, int]] = set()
    result = ds
    for element in ds:
        tag = element.tag
        if not tag.is_private:
            if element.is_sequence:
                items = [
                    _strip_private(item, kb, (_path(parent, tag), index), records)
                    for index, item in enumerate(element.items)
                ]
                if any(new is not old for new, old in zip(items, element.items, strict=True)):
                    result = result.set(element.with_items(items))
            continue
        if tag.is_private_creator:
            continue
        block = tag.private_block
        creator = creators.get((tag.group, block)) if block is not None else None
        if kb is not None and creator is not None and kb.is_safe(creator, tag):
            kept_blocks.add((tag.group, block))  # type: ignore[arg-type]
            continue
        _record(records, _path(parent, tag), ResolvedAction.REMOVE, element)
        result = result.delete(tag)

    for group, element_number in creators:
        if (group, element_number) not in kept_blocks:
            tag = Tag(group, element_number)
            _record(records, _path(parent, tag), ResolvedAction.REMOVE, ds.get(tag))
            result = result.delete(tag)
    return result


# -- type 2 insertion --------------------------------------------------------


def insert_missing_type2(
    ds: DataSet, required: list[Tag] | tuple[Tag, ...], *, records: list[AuditRecord] | None = None
) -> DataSet:
    result = ds
    for tag in required:
        if tag in result:
            continue
        entry = lookup(tag)
        vr = entry.vr if entry is not None else VR.UN
        result = result.set(make_element(tag, vr, _empty_value(vr)))  # type: ignore[arg-type]
        if records is not None:
            records.append(
                AuditRecord(
                    path=str(tag),
                    action="insert_empty",
                    original_present=False,
                    category="remove",
                )
            )
    return result


# -- table walk --------------------------------------------------------------


@dataclass
class _Walker:
    profile: Profile
    uid_map: UidMap
    clean_ctx: CleanContext
    shift_days: int | None
    records: list[AuditRecord] = field(default_factory=list)

    @property
    def options(self) -> ProfileOptions:
        return self.profile.options

    def process(
        self, ds: DataSet, parent: tuple[ElementPath, int] | None, clean_leaves: bool
    ) -> DataSet:
        result = ds
        for element in ds:
            tag = element.tag
            if tag.is_private:
                continue
            path = _path(parent, tag)
            plan = self.profile.table.plan_for(tag)
            if plan is None:
                result = self._untabled(result, element, path, clean_leaves)
                continue
            action = plan.resolve(tag, ds, self.profile.policy)
            try:
                result = self._apply(result, element, path, action, clean_leaves)
            except InvalidUid as exc:
                _record(self.records, path, ResolvedAction.REMOVE, element, error=exc.message)
                logger.warning(
                    "invalid UID removed", extra={"tag_path": str(path), "reason": exc.code}
                )
                result = result.delete(tag)
        return result

    def _recurse(self, element: DataElement, path: ElementPath, clean_leaves: bool) -> DataElement:
        items = [
            self.process(item, (path, index), clean_leaves)
            for index, item in enumerate(element.items)
        ]
        return element.with_items(items)

    def _untabled(
        self, result: DataSet, element: DataElement, path: ElementPath, clean_leaves: bool
    ) -> DataSet:
        if element.is_sequence:
            return result.set(self._recurse(element, path, clean_leaves))
        if element.vr is VR.UI:
            return self._remap_untabled_uids(result, element, path)
        if clean_leaves and self.options.clean_descriptors and element.vr in CLEANABLE_VRS:
            return self._clean(result, element, path, record_unchanged=False)
        return result

    def _remap_untabled_uids(
        self, result: DataSet, element: DataElement, path: ElementPath
    ) -> DataSet:
        """Instance-like UIDs outside the table still go through the shared map."""
        values = element.strings
        if self.options.retain_uids or element.tag in UNTABLED_KEPT_UIDS or not values:
            return result
        if all(not value or value.startswith(DICOM_UID_ROOT) for value in values):
            return result
        try:
            remapped = [
                value if value.startswith(DICOM_UID_ROOT) else self.uid_map.remap(value)
                for value in values
                if value
            ]
        except InvalidUid as exc:
            _record(self.records, path, ResolvedAction.REMOVE, element, error=exc.message)
            return result.delete(element.tag)
        _record(self.records, path, ResolvedAction.REMAP_UID, element)
        return result.set(make_element(element.tag, VR.UI, remapped))

    def _apply(
        self,
        result: DataSet,
        element: DataElement,
        path: ElementPath,
        action: ResolvedAction,
        clean_leaves: bool,
    ) -> DataSet:
        tag = element.tag
        if action is ResolvedAction.REMOVE:
            _record(self.records, path, action, element)
            return result.delete(tag)

        if action is ResolvedAction.ZERO:
            _record(self.records, path, action, element)
            if element.is_sequence:
                return result.set(element.with_items(()))
            empty = _empty_value(element.vr)
            return result.set(make_element(tag, element.vr, empty))  # type: ignore[arg-type]

        if action is ResolvedAction.DUMMY:
            _record(self.records, path, action, element)
            if element.is_sequence:
                return result.set(self._recurse(element, path, self.options.clean_descriptors))
            if element.vr is VR.UI:
                return result.set(make_element(tag, VR.UI, self._dummy_uids(element, path)))
            dummy = dummy_value_for(element.vr, uid_root=self.uid_map.root)
            return result.set(make_element(tag, element.vr, dummy))

        if action is ResolvedAction.REMAP_UID:
            if element.is_sequence:
                return result.set(self._recurse(element, path, clean_leaves))
            if element.vr is not VR.UI or element.strings is None:
                _record(
                    self.records, path, ResolvedAction.REMOVE, element, error="not a UI element"
                )
                return result.delete(tag)
            if self.options.retain_uids:
                return result
            _record(self.records, path, action, element)
            remapped = [self.uid_map.remap(value) for value in element.strings if value]
            return result.set(make_element(tag, VR.UI, remapped))

        if action is ResolvedAction.CLEAN:
            if element.is_sequence:
                _record(self.records, path, action, element)
                return result.set(self._recurse(element, path, True))
            if element.vr not in CLEANABLE_VRS or element.strings is None:
                problem = f"cannot clean VR {element.vr}"
                _record(self.records, path, ResolvedAction.REMOVE, element, error=problem)
                return result.delete(tag)
            return self._clean(result, element, path, record_unchanged=True)

        if action is ResolvedAction.SHIFT_DATE:
            if element.is_sequence:
                return result.set(self._recurse(element, path, clean_leaves))
            if (
                element.vr not in (VR.DA, VR.DT)
                or self.shift_days is None
                or element.strings is None
            ):
                return result
            shifted: list[str] = []
            for value in element.strings:
                new = shift_date_value(value, element.vr, self.shift_days)
                if new is None:
                    problem = "date cannot be shifted"
                    _record(self.records, path, ResolvedAction.ZERO, element, error=problem)
                    return result.set(make_element(tag, element.vr, ""))
                shifted.append(new)
            _record(self.records, path, action, element)
            return result.set(make_element(tag, element.vr, shifted))

        # KEEP
        if element.is_sequence:
            return result.set(self._recurse(element, path, clean_leaves))
        return result

    def _dummy_uids(self, element: DataElement, path: ElementPath) -> list[str]:
        values = [value for value in (element.strings or ()) if value]
        if not values:
            return [self.uid_map.derive(str(path))]
        dummies: list[str] = []
        for value in values:
            try:
                dummies.append(self.uid_map.remap(value))
            except InvalidUid:
                dummies.append(self.uid_map.derive(f"{path}:{value}"))
        return dummies

    def _clean(
        self, result: DataSet, element: DataElement, path: ElementPath, *, record_unchanged: bool
    ) -> DataSet:
        cleaned: list[str] = []
        rule_ids: list[str] = []
        for value in element.strings or ():
            text, redactions = clean_text(value, self.clean_ctx)
            cleaned.append(text)
            for redaction in redactions:
                for rule_id in redaction.rule_id.split("+"):
                    if rule_id not in rule_ids:
                        rule_ids.append(rule_id)
        if rule_ids or record_unchanged:
            _record(self.records, path, ResolvedAction.CLEAN, element, rule_ids=tuple(rule_ids))
        if not rule_ids:
            return result
        if all(not value for value in cleaned):
            return result.set(make_element(element.tag, element.vr, ""))
        return result.set(make_element(element.tag, element.vr, cleaned))


def anonymize_sequence_recursive(
    seq: DataElement,
    profile: Profile,
    uid_map: UidMap,
    clean_ctx: CleanContext | None = None,
    *,
    shift_days: int | None = None,
) -> tuple[DataElement, list[AuditRecord]]:
    """Process every item of ``seq`` through the effective table, keeping item structure.

    Leaves without a table entry are cleaned when the profile cleans descriptors.
    """
    if not seq.is_sequence:
        raise ValueError(f"{seq.tag} is not a sequence")
    walker = _Walker(
        profile=profile,
        uid_map=uid_map,
        clean_ctx=clean_ctx or CleanContext(),
        shift_days=shift_days,
    )
    element = walker._recurse(seq, ElementPath.of(seq.tag), profile.options.clean_descriptors)
    return element, walker.records


# -- markers -----------------------------------------------------------------


def already_deidentified(ds: DataSet, options: ProfileOptions) -> bool:
    element = ds.get(DEIDENTIFICATION_METHOD)
    if element is None or element.strings is None:
        return False
    return "+".join(element.strings) == options.method_string


def _mark_deidentified(ds: DataSet, options: ProfileOptions) -> DataSet:
    code_items = [
        DataSet(
            [
                make_element(CODE_VALUE, VR.SH, code),
                make_element(CODING_SCHEME_DESIGNATOR, VR.SH, "DCM"),
                make_element(CODE_MEANING, VR.LO, meaning),
            ]
        )
        for code, meaning in options.method_codes
    ]
    result = ds.set(make_element(PATIENT_IDENTITY_REMOVED, VR.CS, "YES"))
    result = result.set(
        make_element(DEIDENTIFICATION_METHOD, VR.LO, split_method_string(options.method_string))
    )
    return result.set(make_element(DEIDENTIFICATION_METHOD_CODE_SEQUENCE, VR.SQ, code_items))


def _sync_meta(obj: DicomObject, ds: DataSet) -> DataSet:
    sop = ds.get_text(SOP_INSTANCE_UID)
    if not sop:
        return obj.file_meta
    current = obj.file_meta.get_text(MEDIA_STORAGE_SOP_INSTANCE_UID)
    if current == sop:
        return obj.file_meta
    return obj.file_meta.set(make_element(MEDIA_STORAGE_SOP_INSTANCE_UID, VR.UI, sop))


def apply_profile(
    obj: DicomObject,
    profile: Profile,
    uid_map: UidMap,
    clean_ctx: CleanContext | None = None,
    *,
    salt: bytes = b"",
) -> tuple[DicomObject, list[AuditRecord]]:
    options = profile.options
    original = obj.dataset

    shift_days: int | None = None
    if options.retain_modified_dates and not already_deidentified(original, options):
        if options.date_shift_days is not None:
            shift_days = options.date_shift_days
        else:
            shift_days = date_shift_days_for(original.get_text(PATIENT_ID) or "", salt)

    walker = _Walker(
        profile=profile,
        uid_map=uid_map,
        clean_ctx=clean_ctx or CleanContext.from_dataset(original),
        shift_days=shift_days,
    )
    ds = strip_unsafe_private(
        original, profile.safe_private, options.retain_safe_private, records=walker.records
    )
    ds = walker.process(ds, None, False)
    if options.insert_missing_type2:
        ds = insert_missing_type2(ds, profile.required_type2, records=walker.records)
    ds = _mark_deidentified(ds, options)
    result = obj.with_dataset(ds).with_file_meta(_sync_meta(obj, ds))
    logger.debug("profile applied", extra={"count": len(walker.records)})
    return result, walker.records
