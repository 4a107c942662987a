"""End-to-end runs of the batch pipeline over small input trees."""

import json
from pathlib import Path
from typing import Any

import pytest
from pydicom import dcmread

from deid.audit.writer import read_events, verify_chain
from deid.codec.dataset import DicomObject
from deid.codec.reader import parse_file
from deid.codec.tags import Tag
from deid.config.settings import Settings
from deid.pipeline import runner
from deid.pipeline.config import JobConfig
from deid.pipeline.runner import SUMMARY_FILE_NAME, run
from scripts.generate_synthetic_dicom_corpus import generate_corpus
from tests.fixtures import SECONDARY_CAPTURE, ct_elements, ct_file

ORIGINAL_SOP = "1.2.826.0.1.3680043.8.498.1"


def _config(input_root: Path, output_root: Path, **overrides: Any) -> JobConfig:
    return JobConfig.load(
        None, {"input_root": input_root, "output_root": output_root, **overrides}
    )


def _outputs(root: Path) -> dict[str, bytes]:
    return {
        path.relative_to(root).as_posix(): path.read_bytes()
        for path in sorted(root.rglob("*.dcm"))
    }


def test_empty_input_tree_succeeds(settings: Settings, input_root: Path, output_root: Path) -> None:
    summary = run(_config(input_root, output_root))
    assert summary.files_in == 0
    assert summary.exit_code == 0
    written = json.loads(
        (settings.audit_log_path.parent / SUMMARY_FILE_NAME).read_text(encoding="utf-8")
    )
    assert written["files_in"] == 0
    assert verify_chain(settings.audit_log_path)


def test_run_writes_deidentified_output_and_rejects_secondary_capture(
    settings: Settings, input_root: Path, output_root: Path
) -> None:
    (input_root / "ct.dcm").write_bytes(ct_file())
    (input_root / "sc.dcm").write_bytes(
        ct_file(sop_class=SECONDARY_CAPTURE, sop_uid="1.2.826.0.1.3680043.8.498.2")
    )

    summary = run(_config(input_root, output_root))

    assert (summary.files_in, summary.written, summary.rejected, summary.failed) == (2, 1, 1, 0)
    [output] = list(output_root.rglob("*.dcm"))
    oracle = dcmread(output)
    assert str(oracle.PatientName) == ""
    assert oracle.PatientIdentityRemoved == "YES"
    assert oracle.SOPInstanceUID.startswith("2.25.")
    assert oracle.SOPInstanceUID != ORIGINAL_SOP
    assert oracle.file_meta.MediaStorageSOPInstanceUID == oracle.SOPInstanceUID
    assert output.name == f"{oracle.SOPInstanceUID}.dcm"
    assert "StudyDescription" not in oracle

    log_text = settings.audit_log_path.read_text(encoding="utf-8")
    assert "DOE" not in log_text
    assert "PID12345" not in log_text
    assert verify_chain(settings.audit_log_path)
    events = read_events(settings.audit_log_path)
    assert [event["event_type"] for event in events] == [
        "file_rejected",
        "file_written",
        "run_summary",
    ]
    assert events[-1]["summary"]["rejected"] == 1


def test_reruns_with_persisted_uid_map_are_deterministic(
    settings: Settings, input_root: Path, tmp_path: Path
) -> None:
    (input_root / "ct.dcm").write_bytes(ct_file(image_comments="DOE JOHN seen 19950101"))
    uid_map = tmp_path / "uid_map.tsv"

    run(_config(input_root, tmp_path / "out_a", uid_map_path=uid_map, profile={"options": "midi"}))
    rows = uid_map.read_text(encoding="utf-8").splitlines()
    run(_config(input_root, tmp_path / "out_b", uid_map_path=uid_map, profile={"options": "midi"}))

    assert _outputs(tmp_path / "out_a") == _outputs(tmp_path / "out_b")
    assert uid_map.read_text(encoding="utf-8").splitlines() == rows
    assert any(row.startswith(f"{ORIGINAL_SOP}\t2.25.") for row in rows)


def test_pipeline_output_is_a_fixed_point(
    settings: Settings, input_root: Path, tmp_path: Path
) -> None:
    for index in range(3):
        (input_root / f"IMG{index}.dcm").write_bytes(
            ct_file(
                sop_uid=f"1.2.3.{index + 1}",
                instance_number=str(index + 1),
                image_comments="DOE JOHN seen 19950101 referred by Dr SMITH",
            )
        )
    uid_map = tmp_path / "uid_map.tsv"
    first = tmp_path / "first"
    second = tmp_path / "second"

    run(_config(input_root, first, uid_map_path=uid_map, profile={"options": "midi"}))
    run(_config(first, second, uid_map_path=uid_map, profile={"options": "midi"}))

    assert _outputs(first) == _outputs(second)
    assert len(_outputs(first)) == 3


def test_dry_run_writes_nothing_but_the_audit(
    settings: Settings, input_root: Path, output_root: Path, tmp_path: Path
) -> None:
    (input_root / "ct.dcm").write_bytes(ct_file())
    uid_map = tmp_path / "uid_map.tsv"

    summary = run(_config(input_root, output_root, dry_run=True, uid_map_path=uid_map))

    assert summary.written == 1
    assert not output_root.exists()
    assert not uid_map.exists()
    assert verify_chain(settings.audit_log_path)


@pytest.mark.parametrize(
    ("policy", "written", "not_attempted"),
    [("skip", 2, 0), ("halt", 0, 2)],
)
def test_failure_policy(
    settings: Settings,
    input_root: Path,
    output_root: Path,
    policy: str,
    written: int,
    not_attempted: int,
) -> None:
    (input_root / "a_broken.dcm").write_bytes(b"\x00" * 64)
    (input_root / "b.dcm").write_bytes(ct_file(sop_uid="1.2.3.1"))
    (input_root / "c.dcm").write_bytes(ct_file(sop_uid="1.2.3.2"))

    summary = run(_config(input_root, output_root, failure_policy=policy))

    assert summary.failed == 1
    assert summary.written == written
    assert summary.not_attempted == not_attempted
    assert summary.exit_code == 1
    failure = next(
        event
        for event in read_events(settings.audit_log_path)
        if event["event_type"] == "file_failed"
    )
    assert failure["error"]["code"] == "malformed_file"
    assert failure["error"]["file_id"] == failure["file_id"]


def test_unexpected_errors_fail_only_their_file(
    settings: Settings,
    input_root: Path,
    output_root: Path,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    real_apply = runner.apply_profile

    def flaky_apply(obj: DicomObject, *args: Any, **kwargs: Any) -> Any:
        if obj.dataset.get_text(Tag(0x0008, 0x0018)) == "1.2.3.1":
            raise RuntimeError("cannot handle DOE^JOHN")
        return real_apply(obj, *args, **kwargs)

    monkeypatch.setattr(runner, "apply_profile", flaky_apply)
    (input_root / "a.dcm").write_bytes(ct_file(sop_uid="1.2.3.1"))
    (input_root / "b.dcm").write_bytes(ct_file(sop_uid="1.2.3.2"))

    summary = run(_config(input_root, output_root))

    assert (summary.failed, summary.written) == (1, 1)
    assert summary.exit_code == 1
    written = json.loads(
        (settings.audit_log_path.parent / SUMMARY_FILE_NAME).read_text(encoding="utf-8")
    )
    assert (written["failed"], written["written"]) == (1, 1)
    assert verify_chain(settings.audit_log_path)
    [failure] = [
        event
        for event in read_events(settings.audit_log_path)
        if event["event_type"] == "file_failed"
    ]
    assert failure["error"]["code"] == "internal_error"
    assert failure["error"]["message"] == "RuntimeError"
    assert "DOE" not in settings.audit_log_path.read_text(encoding="utf-8")


def test_dates_past_the_calendar_edge_are_emptied_not_failed(
    settings: Settings, input_root: Path, output_root: Path
) -> None:
    elements = ct_elements()
    elements[(0x0008, 0x0020)] = ("DA", "00010101")
    (input_root / "ct.dcm").write_bytes(ct_file(elements=elements))

    summary = run(
        _config(
            input_root,
            output_root,
            profile={"options": "basic+retainmodifieddates", "date_shift_days": -14},
        )
    )

    assert (summary.failed, summary.written) == (0, 1)
    [output] = list(output_root.rglob("*.dcm"))
    assert dcmread(output).StudyDate == ""
    [written] = [
        event
        for event in read_events(settings.audit_log_path)
        if event["event_type"] == "file_written"
    ]
    [record] = [item for item in written["records"] if item["path"] == "(0008,0020)"]
    assert record["error"] == "date cannot be shifted"


def test_harmonized_files_keep_their_pixel_data(
    settings: Settings, input_root: Path, output_root: Path
) -> None:
    originals = {}
    for index in range(3):
        description = "CHEST AXIAL DOE" if index == 2 else "CHEST AXIAL"
        data = ct_file(
            sop_uid=f"1.2.3.{index}",
            instance_number=str(index + 1),
            series_description=description,
        )
        (input_root / f"IMG{index}.dcm").write_bytes(data)
        originals[str(index + 1)] = dcmread(input_root / f"IMG{index}.dcm").PixelData

    run(_config(input_root, output_root, profile={"options": "midi"}))

    outputs = [dcmread(path) for path in output_root.rglob("*.dcm")]
    assert len(outputs) == 3
    for oracle in outputs:
        assert oracle.PixelData == originals[str(oracle.InstanceNumber)]


def test_series_is_harmonized_before_deidentification(
    settings: Settings, input_root: Path, output_root: Path
) -> None:
    for index in range(3):
        description = "CHEST AXIAL DOE" if index == 2 else "CHEST AXIAL"
        (input_root / f"IMG{index}.dcm").write_bytes(
            ct_file(
                sop_uid=f"1.2.3.{index}",
                instance_number=str(index + 1),
                series_description=description,
            )
        )

    summary = run(_config(input_root, output_root, profile={"options": "midi"}))

    assert summary.inconsistencies_before == 1
    assert summary.inconsistencies_after == 0
    assert summary.harmonized_instances == 1
    descriptions = {str(dcmread(path).SeriesDescription) for path in output_root.rglob("*.dcm")}
    assert descriptions == {"CHEST AXIAL"}
    events = read_events(settings.audit_log_path)
    [harmonization] = [event for event in events if event["event_type"] == "harmonization"]
    assert harmonization["harmonization"]["member_count"] == 3
    assert "CHEST" not in settings.audit_log_path.read_text(encoding="utf-8")


def test_safe_private_elements_survive_implicit_files(
    settings: Settings, input_root: Path, output_root: Path
) -> None:
    elements = ct_elements()
    elements[(0x0029, 0x0010)] = ("LO", "SIEMENS CSA HEADER")
    elements[(0x0029, 0x1008)] = ("CS", "IMAGE NUM 4")
    elements[(0x0029, 0x1030)] = ("LO", "OPERATOR SMITH")
    (input_root / "ct.dcm").write_bytes(ct_file(implicit_vr=True, elements=elements))

    run(_config(input_root, output_root, profile={"options": "basic+retainsafeprivate"}))

    [output] = list(output_root.rglob("*.dcm"))
    obj = parse_file(output.read_bytes())
    assert obj.transfer_syntax == "1.2.840.10008.1.2"
    assert obj.dataset.get_text(Tag(0x0029, 0x0010)) == "SIEMENS CSA HEADER"
    assert obj.dataset[Tag(0x0029, 0x1008)].raw == b"IMAGE NUM 4 "
    assert Tag(0x0029, 0x1030) not in obj.dataset
    assert b"OPERATOR" not in output.read_bytes()


def test_segmentation_references_follow_remapped_images(
    settings: Settings, tmp_path: Path, output_root: Path
) -> None:
    corpus = tmp_path / "corpus"
    generate_corpus(corpus, series_count=1, instances_per_series=3, seed=5)

    summary = run(_config(corpus / "input", output_root))
    assert (summary.written, summary.rejected, summary.failed) == (4, 2, 0)

    datasets = [dcmread(path) for path in output_root.rglob("*.dcm")]
    [segmentation] = [ds for ds in datasets if ds.Modality == "SEG"]
    images = [ds for ds in datasets if ds.Modality != "SEG"]
    series_item = segmentation.ReferencedSeriesSequence[0]
    assert series_item.SeriesInstanceUID == images[0].SeriesInstanceUID
    referenced = {item.ReferencedSOPInstanceUID for item in series_item.ReferencedInstanceSequence}
    assert referenced == {ds.SOPInstanceUID for ds in images}
    assert all(uid.startswith("2.25.") for uid in referenced)
