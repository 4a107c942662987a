"""Profile composition: action table + options -> per-tag plan."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum

from deid.codec.dataset import DataSet
from deid.codec.tags import VR, Tag
from deid.core.errors import ConflictingOverride
from deid.dictionary.actions import (
    ActionTable,
    BasicAction,
    DeidActionEntry,
    OverrideAction,
    default_action_table,
)
from deid.dictionary.policy import default_required_type2, default_type_policy
from deid.dictionary.private_kb import SafePrivateKB, default_safe_private_kb
from deid.profile.options import ProfileOptions

logger = logging.getLogger(__name__)


class ResolvedAction(StrEnum):
    REMOVE = "remove"
    ZERO = "zero"
    DUMMY = "dummy"
    REMAP_UID = "remap_uid"
    CLEAN = "clean"
    KEEP = "keep"
    SHIFT_DATE = "shift_date"


_SIMPLE: dict[str, ResolvedAction] = {
    "X": ResolvedAction.REMOVE,
    "Z": ResolvedAction.ZERO,
    "D": ResolvedAction.DUMMY,
    "U": ResolvedAction.REMAP_UID,
    "U*": ResolvedAction.REMAP_UID,
    "C": ResolvedAction.CLEAN,
}

# Preference order per attribute type when an action is multiplexed.
_TYPE_PREFERENCE: dict[int, tuple[str, ...]] = {
    1: ("D", "Z", "X"),
    2: ("Z", "D", "X"),
    3: ("X", "Z", "D"),
}


@dataclass(frozen=True)
class Plan:
    """Composed action for one table entry; ``compound`` is resolved per element."""

    entry: DeidActionEntry
    action: ResolvedAction | None
    compound: BasicAction | None = None
    source: str = "basic"

    def resolve(self, tag: Tag, ds: DataSet, policy: dict[Tag, int]) -> ResolvedAction:
        if self.action is not None:
            return self.action
        assert self.compound is not None
        return resolve_multiplex(self.compound, tag, ds, policy)


class EffectiveTable:
    def __init__(self, table: ActionTable, plans: dict[str, Plan]):
        self._table = table
        self._plans = plans

    def __len__(self) -> int:
        return len(self._plans)

    def plan_for(self, tag: Tag) -> Plan | None:
        entry = self._table.match(tag)
        if entry is None:
            return None
        return self._plans[entry.pattern]

    def plans(self) -> list[Plan]:
        return list(self._plans.values())


def _override_action(option: str, action: OverrideAction) -> ResolvedAction:
    if action is OverrideAction.KEEP:
        return ResolvedAction.KEEP
    if option == "retain_modified_dates":
        return ResolvedAction.SHIFT_DATE
    return ResolvedAction.CLEAN


def compose_profile(table: ActionTable, opts: ProfileOptions) -> EffectiveTable:
    plans: dict[str, Plan] = {}
    for entry in table:
        enabled = {
            option: _override_action(option, action)
            for option, action in sorted(entry.overrides.items())
            if opts.enabled(option)
        }
        if not enabled:
            if entry.basic_action.is_compound:
                plans[entry.pattern] = Plan(entry=entry, action=None, compound=entry.basic_action)
            else:
                plans[entry.pattern] = Plan(entry=entry, action=_SIMPLE[entry.basic_action.value])
            continue

        actions = set(enabled.values())
        non_keep = actions - {ResolvedAction.KEEP}
        if len(non_keep) > 1:
            raise ConflictingOverride(
                f"{entry.pattern}: options {sorted(enabled)} assign {sorted(non_keep)}"
            )
        # Clean wins over Keep when a clean option and a retain option both apply.
        chosen = next(iter(non_keep)) if non_keep else ResolvedAction.KEEP
        source = "+".join(option for option, action in enabled.items() if action is chosen)
        plans[entry.pattern] = Plan(entry=entry, action=chosen, source=source)
    return EffectiveTable(table, plans)


def resolve_multiplex(
    action: BasicAction, tag: Tag, ds: DataSet, policy: dict[Tag, int] | None = None
) -> ResolvedAction:
    """Pick one concrete action for a compound entry such as X/Z/D.

    Absent elements resolve to Remove (a no-op). ``X/Z/U*`` keeps UID
    elements (remapped) and sequences (recursed). Otherwise the attribute's
    type-likeness from ``policy`` orders the candidates; UID elements prefer
    a dummy UID over an empty value.
    """
    element = ds.get(tag)
    if element is None:
        return ResolvedAction.REMOVE
    choices = action.choices
    if "U*" in choices:
        if element.vr is VR.UI:
            return ResolvedAction.REMAP_UID
        if element.is_sequence:
            return ResolvedAction.DUMMY
        choices = tuple(choice for choice in choices if choice != "U*")
    if element.vr is VR.UI and "D" in choices:
        return ResolvedAction.DUMMY
    attribute_type = (policy or {}).get(tag, 3)
    for letter in _TYPE_PREFERENCE.get(attribute_type, _TYPE_PREFERENCE[3]):
        if letter in choices:
            return _SIMPLE[letter]
    return _SIMPLE[choices[0]]


@dataclass(frozen=True)
class Profile:
    """Everything apply_profile needs besides the UID map and clean context."""

    options: ProfileOptions
    table: EffectiveTable
    policy: dict[Tag, int] = field(default_factory=dict)
    safe_private: SafePrivateKB | None = None
    required_type2: tuple[Tag, ...] = ()

    @classmethod
    def build(
        cls,
        options: ProfileOptions,
        *,
        action_table: ActionTable | None = None,
        policy: dict[Tag, int] | None = None,
        safe_private: SafePrivateKB | None = None,
        required_type2: list[Tag] | None = None,
    ) -> Profile:
        table = compose_profile(action_table or default_action_table(), options)
        kb = safe_private
        if kb is None and options.retain_safe_private:
            kb = default_safe_private_kb()
        logger.info(
            "profile composed",
            extra={"action": options.method_string, "count": len(table)},
        )
        return cls(
            options=options,
            table=table,
            policy=policy if policy is not None else default_type_policy(),
            safe_private=kb,
            required_type2=tuple(
                required_type2 if required_type2 is not None else default_required_type2()
            ),
        )
