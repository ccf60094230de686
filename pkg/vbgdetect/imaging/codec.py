"""Lossless PNG and baseline JPEG I/O through Pillow."""

from __future__ import annotations

import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from vbgdetect.config import settings
from vbgdetect.errors import FrameFormatError, InvalidInputError, VbgError
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import ImageFormat

logger = logging.getLogger(__name__)

_SUPPORTED_FORMATS = frozenset({"PNG", "JPEG"})
FRAME_SUFFIXES = frozenset({".png", ".jpg", ".jpeg"})


class FrameWriteError(VbgError):
    """Destination cannot be written."""

    exit_code = 3


def _decode(image: Image.Image, origin: str) -> Frame:
    if image.format not in _SUPPORTED_FORMATS:
        raise FrameFormatError(f"{origin}: unsupported format {image.format}")
    if image.mode != "RGB":
        raise FrameFormatError(f"{origin}: expected a 3-channel RGB image, got mode {image.mode}")
    return Frame(np.asarray(image, dtype=np.uint8).copy())


def load_frame(path: str | Path) -> Frame:
    """Decode a PNG or baseline JPEG file into a Frame."""
    path = Path(path)
    if not path.is_file():
        raise FrameFormatError(f"{path}: file does not exist")
    try:
        with Image.open(path) as image:
            image.load()
            return _decode(image, str(path))
    except (UnidentifiedImageError, OSError) as exc:
        raise FrameFormatError(f"{path}: cannot decode ({exc})") from exc


def _check_quality(quality: int | None) -> int:
    if quality is None or not 1 <= int(quality) <= 100:
        raise InvalidInputError(f"JPEG quality must be in [1, 100], got {quality}")
    return int(quality)


def _encode(frame: Frame, target, fmt: ImageFormat, quality: int | None) -> None:
    image = Image.fromarray(frame.pixels)
    if fmt is ImageFormat.PNG:
        image.save(target, format="PNG", compress_level=settings.PNG_COMPRESS_LEVEL)
    else:
        image.save(
            target,
            format="JPEG",
            quality=_check_quality(quality),
            subsampling=settings.JPEG_SUBSAMPLING,
            optimize=False,
        )


def save_frame(
    frame: Frame,
    path: str | Path,
    fmt: ImageFormat | str = ImageFormat.PNG,
    quality: int | None = None,
) -> None:
    """Write a frame as PNG (bit-exact) or JPEG at quality factor ``quality``."""
    fmt = ImageFormat(fmt)
    if fmt is ImageFormat.JPEG:
        _check_quality(quality)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            _encode(frame, f, fmt, quality)
    except OSError as exc:
        raise FrameWriteError(f"{path}: cannot write ({exc})") from exc


def encode_jpeg(frame: Frame, quality: int) -> Frame:
    """JPEG-encode at ``quality`` in memory and decode the result."""
    buf = io.BytesIO()
    _encode(frame, buf, ImageFormat.JPEG, quality)
    buf.seek(0)
    with Image.open(buf) as image:
        image.load()
        return _decode(image, "<jpeg buffer>")
