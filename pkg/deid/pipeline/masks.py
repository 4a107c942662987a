"""Rectangle pixel masks for uncompressed native pixel data."""

import logging

import numpy as np

from deid.codec.dataset import DataElement, DicomObject
from deid.codec.syntax import is_uncompressed
from deid.codec.tags import Tag
from deid.core.errors import MaskOutOfBounds, UnsupportedPixelFormat
from deid.pipeline.config import PixelMaskSpec

logger = logging.getLogger(__name__)

PIXEL_DATA = Tag(0x7FE0, 0x0010)
SAMPLES_PER_PIXEL = Tag(0x0028, 0x0002)
PLANAR_CONFIGURATION = Tag(0x0028, 0x0006)
NUMBER_OF_FRAMES = Tag(0x0028, 0x0008)
ROWS = Tag(0x0028, 0x0010)
COLUMNS = Tag(0x0028, 0x0011)
BITS_ALLOCATED = Tag(0x0028, 0x0100)
PIXEL_REPRESENTATION = Tag(0x0028, 0x0103)


def apply_pixel_masks(obj: DicomObject, spec: PixelMaskSpec) -> DicomObject:
    """Fill every rectangle in every frame with ``spec.fill``; nothing else changes."""
    if not spec.rectangles:
        return obj
    ds = obj.dataset
    if not is_uncompressed(obj.transfer_syntax):
        raise UnsupportedPixelFormat(f"transfer syntax {obj.transfer_syntax} is not native")
    pixel = ds.get(PIXEL_DATA)
    if pixel is None or pixel.undefined_length or not isinstance(pixel.value, bytes):
        raise UnsupportedPixelFormat("no native PixelData element")

    bits = ds.get_int(BITS_ALLOCATED)
    rows = ds.get_int(ROWS)
    columns = ds.get_int(COLUMNS)
    if bits not in (8, 16) or not rows or not columns:
        raise UnsupportedPixelFormat(
            f"unsupported geometry: bits={bits} rows={rows} columns={columns}"
        )
    samples = ds.get_int(SAMPLES_PER_PIXEL) or 1
    frames = ds.get_int(NUMBER_OF_FRAMES) or 1
    planar = ds.get_int(PLANAR_CONFIGURATION) or 0
    signed = ds.get_int(PIXEL_REPRESENTATION) == 1

    for x, y, width, height in spec.rectangles:
        if x + width > columns or y + height > rows:
            raise MaskOutOfBounds(
                f"rectangle {(x, y, width, height)} outside {columns}x{rows} image"
            )

    if bits == 8:
        dtype = np.dtype(np.int8 if signed else np.uint8)
    else:
        dtype = np.dtype("<i2" if signed else "<u2")
    expected = frames * rows * columns * samples * dtype.itemsize
    data = pixel.value
    if len(data) < expected:
        raise UnsupportedPixelFormat(f"PixelData holds {len(data)} bytes, expected {expected}")

    info = np.iinfo(dtype)
    if not info.min <= spec.fill <= info.max:
        raise UnsupportedPixelFormat(f"fill value {spec.fill} does not fit {dtype}")

    array = np.frombuffer(data[:expected], dtype=dtype).copy()
    if samples > 1 and planar == 1:
        array = array.reshape(frames, samples, rows, columns)
        for x, y, width, height in spec.rectangles:
            array[:, :, y : y + height, x : x + width] = spec.fill
    else:
        array = array.reshape(frames, rows, columns, samples)
        for x, y, width, height in spec.rectangles:
            array[:, y : y + height, x : x + width, :] = spec.fill

    masked = array.tobytes() + data[expected:]
    element = DataElement(tag=PIXEL_DATA, vr=pixel.vr, value=masked)
    logger.debug("pixel mask applied", extra={"count": len(spec.rectangles)})
    return obj.with_dataset(ds.set(element))
