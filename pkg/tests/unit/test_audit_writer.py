import json
from pathlib import Path

import pytest

from deid.audit.writer import AuditValidationError, AuditWriter, read_events, verify_chain
from deid.config.settings import Settings


def _writer(settings: Settings, tmp_path: Path) -> AuditWriter:
    return AuditWriter(settings, tmp_path / "audit.jsonl")


def test_events_are_hash_chained(settings: Settings, tmp_path: Path) -> None:
    writer = _writer(settings, tmp_path)
    first = writer.write_event({"event_type": "file_rejected", "run_id": "r1", "reason": "sop"})
    second = writer.write_event(
        {"event_type": "file_written", "run_id": "r1", "file_id": "0123456789abcdef"}
    )
    assert first["prev_hash"] == ""
    assert second["prev_hash"] == first["payload_hash"]
    assert verify_chain(writer.log_path)
    assert [event["event_type"] for event in read_events(writer.log_path)] == [
        "file_rejected",
        "file_written",
    ]


def test_new_writer_continues_existing_chain(settings: Settings, tmp_path: Path) -> None:
    first = _writer(settings, tmp_path).write_event({"event_type": "run_summary", "run_id": "r1"})
    second = _writer(settings, tmp_path).write_event({"event_type": "run_summary", "run_id": "r2"})
    assert second["prev_hash"] == first["payload_hash"]
    assert verify_chain(tmp_path / "audit.jsonl")


def test_tampering_breaks_the_chain(settings: Settings, tmp_path: Path) -> None:
    writer = _writer(settings, tmp_path)
    for reason in ("a", "b", "c"):
        writer.write_event({"event_type": "file_rejected", "run_id": "r1", "reason": reason})
    lines = writer.log_path.read_text(encoding="utf-8").splitlines()
    edited = json.loads(lines[1])
    edited["reason"] = "z"
    lines[1] = json.dumps(edited)
    writer.log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert not verify_chain(writer.log_path)

    del lines[1]
    writer.log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert not verify_chain(writer.log_path)


def test_events_outside_the_contract_are_refused(settings: Settings, tmp_path: Path) -> None:
    writer = _writer(settings, tmp_path)
    with pytest.raises(AuditValidationError):
        writer.write_event({"event_type": "file_written", "run_id": "r1", "value": "DOE^JOHN"})
    with pytest.raises(AuditValidationError):
        writer.write_event({"event_type": "file_written", "run_id": "r1", "file_id": "bad"})
    assert not writer.log_path.exists()
