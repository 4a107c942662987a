import pytest

from deid.codec.dataset import DataSet, make_element
from deid.codec.tags import VR, Tag
from deid.core.errors import ConflictingOverride, InvalidProfile
from deid.dictionary.actions import BasicAction, load_action_table
from deid.profile.compose import ResolvedAction, compose_profile, resolve_multiplex
from deid.profile.options import ProfileOptions, split_method_string

INSTITUTION_NAME = Tag(0x0008, 0x0080)
STUDY_DATE = Tag(0x0008, 0x0020)


def test_midi_preset_enables_four_options() -> None:
    options = ProfileOptions.from_profile_string("midi")
    assert options.clean_descriptors
    assert options.retain_safe_private
    assert options.retain_patient_characteristics
    assert options.retain_modified_dates
    assert not options.retain_uids
    assert options.profile_string == (
        "basic+cleandesc+retainmodifieddates+retainpatientchars+retainsafeprivate"
    )


def test_method_string_and_codes_follow_option_order() -> None:
    options = ProfileOptions.from_profile_string("basic+retainuids+cleandesc")
    assert options.method_string == "BasicProfile+CleanDescriptors+RetainUIDs"
    assert [code for code, _ in options.method_codes] == ["113100", "113105", "113110"]


def test_profile_string_errors() -> None:
    with pytest.raises(InvalidProfile):
        ProfileOptions.from_profile_string("basic+retaineverything")
    with pytest.raises(InvalidProfile):
        ProfileOptions.from_profile_string("basic+retainfulldates+retainmodifieddates")
    with pytest.raises(InvalidProfile):
        ProfileOptions.from_profile_string("   ")


def test_split_method_string_respects_limit() -> None:
    values = split_method_string("BasicProfile+CleanDescriptors+RetainLongModifiedDates", limit=32)
    assert values == ["BasicProfile+CleanDescriptors", "RetainLongModifiedDates"]
    assert all(len(value) <= 32 for value in values)


def test_compose_applies_enabled_overrides() -> None:
    table = load_action_table(
        "(0008,0020);Z;retain_full_dates=K,retain_modified_dates=C\n"
        "(0008,1030);X;clean_descriptors=C\n"
        "(0010,0040);Z;retain_patient_characteristics=K\n"
    )
    basic = compose_profile(table, ProfileOptions())
    assert basic.plan_for(STUDY_DATE).action is ResolvedAction.ZERO

    midi = compose_profile(table, ProfileOptions.from_profile_string("midi"))
    assert midi.plan_for(STUDY_DATE).action is ResolvedAction.SHIFT_DATE
    assert midi.plan_for(Tag(0x0008, 0x1030)).action is ResolvedAction.CLEAN
    assert midi.plan_for(Tag(0x0010, 0x0040)).action is ResolvedAction.KEEP

    full = compose_profile(table, ProfileOptions(retain_full_dates=True))
    assert full.plan_for(STUDY_DATE).action is ResolvedAction.KEEP
    assert full.plan_for(STUDY_DATE).source == "retain_full_dates"


def test_clean_wins_over_keep() -> None:
    table = load_action_table("(0018,1030);X/D;clean_descriptors=C,retain_device_identity=K\n")
    options = ProfileOptions(clean_descriptors=True, retain_device_identity=True)
    plan = compose_profile(table, options).plan_for(Tag(0x0018, 0x1030))
    assert plan.action is ResolvedAction.CLEAN


def test_two_different_non_keep_overrides_conflict() -> None:
    table = load_action_table("(0008,0020);Z;clean_descriptors=C,retain_modified_dates=C\n")
    options = ProfileOptions(clean_descriptors=True, retain_modified_dates=True)
    with pytest.raises(ConflictingOverride):
        compose_profile(table, options)


def test_multiplex_uses_type_likeness() -> None:
    ds = DataSet([make_element(INSTITUTION_NAME, VR.LO, "GENERAL HOSPITAL")])
    action = BasicAction.REMOVE_ZERO_OR_DUMMY
    assert resolve_multiplex(action, INSTITUTION_NAME, ds, {}) is ResolvedAction.REMOVE
    type_two = {INSTITUTION_NAME: 2}
    type_one = {INSTITUTION_NAME: 1}
    assert resolve_multiplex(action, INSTITUTION_NAME, ds, type_two) is ResolvedAction.ZERO
    assert resolve_multiplex(action, INSTITUTION_NAME, ds, type_one) is ResolvedAction.DUMMY


def test_multiplex_absent_element_is_remove() -> None:
    assert (
        resolve_multiplex(BasicAction.ZERO_OR_DUMMY, STUDY_DATE, DataSet(), {STUDY_DATE: 1})
        is ResolvedAction.REMOVE
    )


def test_multiplex_uid_variants() -> None:
    uid_tag = Tag(0x0008, 0x1155)
    ds = DataSet([make_element(uid_tag, VR.UI, "1.2.3")])
    assert (
        resolve_multiplex(BasicAction.REMOVE_ZERO_OR_UID, uid_tag, ds) is ResolvedAction.REMAP_UID
    )
    assert resolve_multiplex(BasicAction.REMOVE_OR_DUMMY, uid_tag, ds) is ResolvedAction.DUMMY

    seq_tag = Tag(0x0008, 0x1140)
    referenced = DataSet([make_element(uid_tag, VR.UI, "1.2.3")])
    seq = DataSet([make_element(seq_tag, VR.SQ, [referenced])])
    assert resolve_multiplex(BasicAction.REMOVE_ZERO_OR_UID, seq_tag, seq) is ResolvedAction.DUMMY
