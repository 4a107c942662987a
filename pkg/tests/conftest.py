from collections.abc import Iterator
from pathlib import Path

import pytest

from deid.config.settings import Settings, clear_settings_cache


@pytest.fixture
def settings(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Iterator[Settings]:
    monkeypatch.setenv("DEID_AUDIT_LOG_PATH", str(tmp_path / "audit" / "events.jsonl"))
    monkeypatch.setenv("DEID_SALT", "test-salt")
    clear_settings_cache()
    yield Settings()
    clear_settings_cache()


@pytest.fixture
def input_root(tmp_path: Path) -> Path:
    root = tmp_path / "input"
    root.mkdir()
    return root


@pytest.fixture
def output_root(tmp_path: Path) -> Path:
    return tmp_path / "output"
