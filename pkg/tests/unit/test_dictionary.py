import pytest

from deid.codec.tags import VR, Tag
from deid.core.errors import ActionTableParseError, CsvFormatError, DuplicateTag
from deid.dictionary.actions import (
    BasicAction,
    OverrideAction,
    default_action_table,
    load_action_table,
)
from deid.dictionary.policy import (
    default_required_type2,
    default_type_policy,
    load_type_policy,
)
from deid.dictionary.private_kb import default_safe_private_kb, load_safe_private_kb
from deid.dictionary.standard import keyword_for, lookup


def test_lookup_standard_and_repeating_group_entries() -> None:
    entry = lookup(Tag(0x0010, 0x0010))
    assert entry is not None
    assert entry.keyword == "PatientName"
    assert entry.vr is VR.PN
    assert not entry.is_pattern

    overlay = lookup(Tag(0x6002, 0x3000))
    assert overlay is not None
    assert overlay.is_pattern
    assert keyword_for(Tag(0x7FE0, 0x0010)) == "PixelData"


def test_lookup_private_tags() -> None:
    assert lookup(Tag(0x0029, 0x1010)) is None
    creator = lookup(Tag(0x0029, 0x0010))
    assert creator is not None
    assert creator.vr is VR.LO


def test_action_table_line_format() -> None:
    table = load_action_table(
        "# comment\n"
        "(0008,0020);Z;retain_full_dates=K,retain_modified_dates=C   # StudyDate\n"
        "(0008,0080);X/Z/D\n"
        "(60xx,4000);X;clean_descriptors=C\n"
    )
    assert len(table) == 3
    study_date = table.match(Tag(0x0008, 0x0020))
    assert study_date is not None
    assert study_date.basic_action is BasicAction.ZERO
    assert study_date.overrides == {
        "retain_full_dates": OverrideAction.KEEP,
        "retain_modified_dates": OverrideAction.CLEAN,
    }
    assert study_date.keyword == "StudyDate"
    assert table.match(Tag(0x0008, 0x0080)).basic_action.choices == ("X", "Z", "D")
    assert table.match(Tag(0x6004, 0x4000)).pattern == "(60xx,4000)"
    assert table.match(Tag(0x0008, 0x0021)) is None


def test_exact_entry_beats_pattern_and_specific_pattern_beats_loose() -> None:
    table = load_action_table("(60xx,xxxx);X\n(60xx,3000);Z\n(6000,3000);C\n")
    assert table.match(Tag(0x6000, 0x3000)).basic_action is BasicAction.CLEAN
    assert table.match(Tag(0x6002, 0x3000)).basic_action is BasicAction.ZERO
    assert table.match(Tag(0x6002, 0x0010)).basic_action is BasicAction.REMOVE


@pytest.mark.parametrize(
    ("text", "line"),
    [
        ("(0008,0020)\n", 1),
        ("(0008,0020);Q\n", 1),
        ("\n(0008,002G);X\n", 2),
        ("(0008,0020);Z;retain_everything=K\n", 1),
        ("(0008,0020);Z;retain_full_dates=X\n", 1),
    ],
)
def test_action_table_errors_carry_line_numbers(text: str, line: int) -> None:
    with pytest.raises(ActionTableParseError) as excinfo:
        load_action_table(text)
    assert excinfo.value.line_number == line


def test_action_table_duplicate_tag() -> None:
    with pytest.raises(DuplicateTag):
        load_action_table("(0008,0020);Z\n(0008,0020);X\n")


def test_default_action_table_covers_core_identifiers() -> None:
    table = default_action_table()
    assert table.match(Tag(0x0010, 0x0010)).basic_action is BasicAction.ZERO
    assert table.match(Tag(0x0008, 0x0018)).basic_action is BasicAction.UID
    assert table.match(Tag(0x0008, 0x1140)).basic_action is BasicAction.REMOVE_ZERO_OR_UID
    assert table.match(Tag(0x0040, 0xA730)).basic_action is BasicAction.DUMMY
    assert table.match(Tag(0x0008, 0x0016)) is None


def test_safe_private_kb_matches_creator_block_offset() -> None:
    kb = load_safe_private_kb(
        b"private_creator,group_hex,element_offset_hex,vr_list,meaning\n"
        b"ACME 1.0,0029,08,CS|LO,Header type\n"
    )
    assert len(kb) == 1
    assert kb.is_safe("acme 1.0 ", Tag(0x0029, 0x1008))
    assert kb.is_safe("ACME 1.0", Tag(0x0029, 0x1108))
    assert not kb.is_safe("ACME 1.0", Tag(0x0029, 0x1009))
    assert not kb.is_safe("OTHER", Tag(0x0029, 0x1008))
    assert kb.entry_for("ACME 1.0", Tag(0x0029, 0x1008)).vrs == (VR.CS, VR.LO)


@pytest.mark.parametrize(
    "row",
    [
        b"ACME,0028,08,CS,even group\n",
        b"ACME,0029,1FF,CS,offset too big\n",
        b"ACME,0029,08,CS\n",
        b",0029,08,CS,no creator\n",
        b"ACME,0029,08,QQ,bad vr\n",
        b"ACME,zz29,08,CS,bad hex\n",
    ],
)
def test_safe_private_kb_rejects_bad_rows(row: bytes) -> None:
    with pytest.raises(CsvFormatError):
        load_safe_private_kb(row)


def test_default_safe_private_kb_knows_siemens_csa() -> None:
    kb = default_safe_private_kb()
    assert kb.is_safe("SIEMENS CSA HEADER", Tag(0x0029, 0x1008))
    assert not kb.is_safe("SIEMENS CSA HEADER", Tag(0x0029, 0x1030))


def test_type_policy_loader() -> None:
    policy = load_type_policy("(0008,0080);3  # InstitutionName\n(0010,0010);2\n")
    assert policy == {Tag(0x0008, 0x0080): 3, Tag(0x0010, 0x0010): 2}
    with pytest.raises(ActionTableParseError):
        load_type_policy("(0008,0080);4\n")
    assert default_type_policy()[Tag(0x0040, 0xA121)] == 1
    assert Tag(0x0010, 0x0010) in default_required_type2()
