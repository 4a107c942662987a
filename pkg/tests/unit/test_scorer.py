import json
from pathlib import Path

import pytest
from jsonschema import validate

from deid.codec.dataset import DataElement, make_element
from deid.codec.tags import VR, ElementPath, Tag
from deid.profile.uid_map import UidMap
from deid.scoring.answer_key import AnswerKeyEntry, Category
from deid.scoring.report import render_table, report_to_dict, write_report
from deid.scoring.scorer import aggregate, index_outputs, judge, judge_all, score
from tests.fixtures import ct_file

NAME = ElementPath.parse("(0010,0010)")
STUDY_UID = ElementPath.parse("(0020,000D)")


def _entry(category: Category, expected: str | None = None) -> AnswerKeyEntry:
    return AnswerKeyEntry("1.2.3", ElementPath.parse("(0008,1030)"), category, expected)


def _text(value: str) -> DataElement:
    return make_element(Tag(0x0008, 0x1030), VR.LO, value)


def _write_series(root: Path, count: int, leaked_index: int | None = None) -> list[str]:
    root.mkdir(parents=True, exist_ok=True)
    uids = []
    for index in range(count):
        uid = f"1.2.826.0.1.3680043.8.498.{100 + index}"
        name = "DOE^JOHN" if index == leaked_index else ""
        (root / f"IMG{index:04d}.dcm").write_bytes(
            ct_file(sop_uid=uid, patient_name=name, instance_number=str(index + 1))
        )
        uids.append(uid)
    return uids


def test_judge_remove_and_retain() -> None:
    assert judge(_entry(Category.REMOVE), None)[0]
    assert judge(_entry(Category.REMOVE), _text(""))[0]
    assert not judge(_entry(Category.REMOVE), _text("CHEST"))[0]
    assert judge(_entry(Category.RETAIN), _text("anything"))[0]
    assert judge(_entry(Category.RETAIN, "CHEST"), _text("CHEST"))[0]
    assert not judge(_entry(Category.RETAIN, "CHEST"), _text("HEAD"))[0]
    assert not judge(_entry(Category.RETAIN), None)[0]


def test_judge_text_categories() -> None:
    assert judge(_entry(Category.TEXT_RETAIN, "CHEST  SURVEY"), _text("CHEST SURVEY since"))[0]
    assert not judge(_entry(Category.TEXT_RETAIN, "CHEST SURVEY"), _text("CHEST"))[0]
    assert judge(_entry(Category.TEXT_REMOVE, "DOE|1998"), _text("CHEST SURVEY since"))[0]
    assert not judge(_entry(Category.TEXT_REMOVE, "DOE|1998"), _text("seen doe"))[0]
    assert judge(_entry(Category.TEXT_REMOVE, "DOE"), None)[0]
    assert not judge(_entry(Category.TEXT_REMOVE), _text("anything"))[0]


def test_judge_dummy_date_and_uid() -> None:
    assert judge(_entry(Category.REPLACE_DUMMY, "DOE^JOHN"), _text("ANONYMIZED"))[0]
    assert not judge(_entry(Category.REPLACE_DUMMY, "DOE^JOHN"), _text("DOE^JOHN"))[0]
    assert not judge(_entry(Category.REPLACE_DUMMY, "DOE^JOHN"), None)[0]
    assert judge(_entry(Category.DATE_ACTION, "20200315"), _text("20200301"))[0]
    assert judge(_entry(Category.DATE_ACTION, "20200315"), None)[0]
    assert not judge(_entry(Category.DATE_ACTION, "20200315"), _text("20200315"))[0]
    uid = make_element(Tag(0x0008, 0x0018), VR.UI, "2.25.99")
    assert judge(AnswerKeyEntry("1.2.3", NAME, Category.REMAP_UID), uid)[0]
    assert not judge(AnswerKeyEntry("2.25.99", NAME, Category.REMAP_UID), uid)[0]


def test_one_failing_instance_fails_its_series(tmp_path: Path) -> None:
    uids = _write_series(tmp_path / "out", 10, leaked_index=3)
    key = [AnswerKeyEntry(uid, NAME, Category.REMOVE) for uid in uids]

    report = score(tmp_path / "out", key, jobs=2)
    removal = report.categories[Category.REMOVE]
    assert (removal.instance_pass, removal.instance_fail) == (9, 1)
    assert (removal.series_pass, removal.series_fail) == (0, 1)
    assert removal.fail_percent == pytest.approx(10.0)
    assert report.overall_display == "90.00"
    assert [item.entry.instance_uid for item in report.failures] == [uids[3]]


def test_missing_output_counts_as_failure(tmp_path: Path) -> None:
    _write_series(tmp_path / "out", 1)
    key = [AnswerKeyEntry("9.9.9", NAME, Category.REMOVE)]
    report = score(tmp_path / "out", key)
    assert report.failure_count == 1
    assert report.failures[0].detail == "missing_output"
    assert report.failures[0].series_key == "missing:9.9.9"


def test_outputs_are_found_through_the_uid_map(tmp_path: Path) -> None:
    out = tmp_path / "out"
    out.mkdir()
    (out / "a.dcm").write_bytes(ct_file(sop_uid="2.25.500", patient_name=""))
    (out / "junk.dcm").write_bytes(b"not dicom")
    uid_map = UidMap()
    uid_map.merge([("1.2.3.4", "2.25.500")])

    outputs = index_outputs(out)
    assert set(outputs) == {"2.25.500"}
    judgements = judge_all([AnswerKeyEntry("1.2.3.4", NAME, Category.REMOVE)], outputs, uid_map)
    assert judgements[0].passed


def test_inconsistent_remapping_fails_every_reference(tmp_path: Path) -> None:
    out = tmp_path / "out"
    out.mkdir()
    (out / "a.dcm").write_bytes(ct_file(sop_uid="1.1", study_uid="2.25.100"))
    (out / "b.dcm").write_bytes(ct_file(sop_uid="1.2", study_uid="2.25.200"))
    key = [
        AnswerKeyEntry("1.1", STUDY_UID, Category.REMAP_UID, "1.9.9"),
        AnswerKeyEntry("1.2", STUDY_UID, Category.REMAP_UID, "1.9.9"),
    ]
    judgements = judge_all(key, index_outputs(out), None)
    assert [item.passed for item in judgements] == [False, False]
    assert judgements[0].detail == "UID remapped inconsistently"


def test_remapping_must_match_the_uid_map(tmp_path: Path) -> None:
    out = tmp_path / "out"
    out.mkdir()
    (out / "a.dcm").write_bytes(ct_file(sop_uid="1.1", study_uid="2.25.100"))
    key = [AnswerKeyEntry("1.1", STUDY_UID, Category.REMAP_UID, "1.9.9")]

    agreeing = UidMap()
    agreeing.merge([("1.9.9", "2.25.100")])
    assert judge_all(key, index_outputs(out), agreeing)[0].passed

    disagreeing = UidMap()
    disagreeing.merge([("1.9.9", "2.25.777")])
    assert not judge_all(key, index_outputs(out), disagreeing)[0].passed


def test_empty_key_scores_one_hundred_percent() -> None:
    report = aggregate([])
    assert report.overall_display == "100.00"


def test_report_table_and_contract(tmp_path: Path) -> None:
    uids = _write_series(tmp_path / "out", 4, leaked_index=0)
    report = score(tmp_path / "out", [AnswerKeyEntry(uid, NAME, Category.REMOVE) for uid in uids])

    table = render_table(report)
    lines = table.splitlines()
    assert lines[0].split() == [
        "category", "inst_pass", "inst_fail", "fail_%", "series_pass", "series_fail"
    ]
    assert lines[2].split() == ["remove", "3", "1", "25.00", "0", "1"]
    assert lines[-1] == "overall: 75.00% (3 passed, 1 failed)"

    root = Path(__file__).resolve().parents[2]
    schema = json.loads(
        (root / "docs/contracts/v1/score-report.schema.json").read_text(encoding="utf-8")
    )
    validate(instance=report_to_dict(report), schema=schema)

    path = tmp_path / "reports" / "score.json"
    payload = write_report(report, path)
    assert json.loads(path.read_text(encoding="utf-8")) == payload
    assert payload["failure_rows"][0]["detail"] == "value still present"
