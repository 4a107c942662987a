from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from deid.codec.dataset import DataSet, DicomObject, make_element
from deid.codec.reader import parse_file
from deid.codec.tags import VR, Tag
from deid.core.errors import ConfigError, MaskOutOfBounds, UnsupportedPixelFormat
from deid.pipeline.config import JobConfig, PixelMaskSpec, SopClassSection
from deid.pipeline.filters import filter_sop_class
from deid.pipeline.masks import PIXEL_DATA, apply_pixel_masks
from tests.fixtures import CT_IMAGE_STORAGE, SECONDARY_CAPTURE, ct_file

SOP_CLASS_UID = Tag(0x0008, 0x0016)


def _object(sop_class: str | None) -> DicomObject:
    elements = [] if sop_class is None else [make_element(SOP_CLASS_UID, VR.UI, sop_class)]
    return DicomObject(
        file_meta=DataSet(), dataset=DataSet(elements), transfer_syntax="1.2.840.10008.1.2.1"
    )


def test_default_filter_rejects_secondary_capture() -> None:
    policy = SopClassSection()
    assert filter_sop_class(_object(CT_IMAGE_STORAGE), policy).keep
    decision = filter_sop_class(_object(SECONDARY_CAPTURE), policy)
    assert not decision.keep
    assert decision.reason is not None
    assert not filter_sop_class(_object(None), policy).keep


def test_allow_list_keeps_only_listed_classes() -> None:
    policy = SopClassSection(mode="allow", uids=[CT_IMAGE_STORAGE])
    assert filter_sop_class(_object(CT_IMAGE_STORAGE), policy).keep
    assert not filter_sop_class(_object("1.2.840.10008.5.1.4.1.1.4"), policy).keep


def test_rectangle_mask_fills_exactly_the_region() -> None:
    obj = parse_file(ct_file(rows=64, columns=64))
    masked = apply_pixel_masks(obj, PixelMaskSpec(rectangles=[(0, 0, 10, 10)]))

    pixels = np.frombuffer(masked.dataset[PIXEL_DATA].value, dtype="<u2").reshape(64, 64)
    assert int((pixels == 0).sum()) == 100
    assert int((pixels[:10, :10] == 0).sum()) == 100
    assert int((pixels == 1000).sum()) == 64 * 64 - 100
    assert masked.dataset.get_text(Tag(0x0010, 0x0010)) == "DOE^JOHN"


def test_mask_outside_image_is_refused() -> None:
    obj = parse_file(ct_file(rows=8, columns=8))
    with pytest.raises(MaskOutOfBounds):
        apply_pixel_masks(obj, PixelMaskSpec(rectangles=[(4, 4, 8, 2)]))


def test_mask_needs_native_pixel_data() -> None:
    obj = replace(parse_file(ct_file()), transfer_syntax="1.2.840.10008.1.2.4.50")
    with pytest.raises(UnsupportedPixelFormat):
        apply_pixel_masks(obj, PixelMaskSpec(rectangles=[(0, 0, 1, 1)]))


def test_mask_selector() -> None:
    ds = DataSet([make_element(Tag(0x0020, 0x000E), VR.UI, "1.2.3")])
    assert PixelMaskSpec(selector="series", match="1.2.3").applies_to(ds)
    assert not PixelMaskSpec(selector="series", match="1.2.4").applies_to(ds)
    with pytest.raises(ValueError):
        PixelMaskSpec(selector="series")


def test_job_config_layers_toml_and_overrides(tmp_path: Path) -> None:
    config_file = tmp_path / "job.toml"
    config_file.write_text(
        f'input_root = "{(tmp_path / "in").as_posix()}"\n'
        f'output_root = "{(tmp_path / "out").as_posix()}"\n'
        "jobs = 2\n"
        "[profile]\n"
        'options = "midi"\n'
        "[harmonize]\n"
        'tags = ["(0008,103E)"]\n',
        encoding="utf-8",
    )
    config = JobConfig.load(config_file, {"jobs": 8, "profile": {"date_shift_days": -30}})
    assert config.jobs == 8
    assert config.profile.options == "midi"
    assert config.profile.date_shift_days == -30
    assert config.harmonize.tag_list == [Tag(0x0008, 0x103E)]
    assert config.sop_class.mode == "deny"


def test_job_config_rejects_output_inside_input(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        JobConfig.load(None, {"input_root": tmp_path, "output_root": tmp_path / "out"})


def test_job_config_reports_bad_values(tmp_path: Path) -> None:
    base = {"input_root": tmp_path / "in", "output_root": tmp_path / "out"}
    with pytest.raises(ConfigError):
        JobConfig.load(None, {**base, "jobs": 0})
    with pytest.raises(ConfigError):
        JobConfig.load(None, {**base, "harmonize": {"tags": ["not-a-tag"]}})
    with pytest.raises(ConfigError):
        JobConfig.load(tmp_path / "missing.toml", base)


def test_salt_comes_from_named_environment_variable(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    roots = {"input_root": tmp_path / "in", "output_root": tmp_path / "out"}
    config = JobConfig.load(None, {**roots, "salt_env": "SITE_SALT"})
    monkeypatch.delenv("SITE_SALT", raising=False)
    with pytest.raises(ConfigError):
        config.salt()
    monkeypatch.setenv("SITE_SALT", "s3cret")
    assert config.salt().get_secret_value() == "s3cret"
