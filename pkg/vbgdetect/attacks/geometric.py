"""Resampling attacks: resize, zoom (upscale + centre crop), rotation.

Resize and zoom use Pillow's bicubic filter (a = -0.5) on float planes.
Upscaling is plain cubic-convolution interpolation. When shrinking, Pillow
stretches the kernel support by 1/scale, so downscaling is antialiased
rather than point-sampled. Rotation uses OpenCV's bicubic warp with
replicated borders.
"""

from __future__ import annotations

import cv2
import numpy as np
from PIL import Image

from vbgdetect.config import settings
from vbgdetect.errors import InvalidInputError
from vbgdetect.imaging.frame import Frame, quantize


def _round_dim(value: float) -> int:
    return int(np.floor(value + 0.5))


def bicubic_resample(pixels: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample an ``HxWxC`` array to ``height x width`` in float32 per channel.

    Shrinking widens the bicubic support by the inverse scale (antialiased).
    """
    channels = []
    for c in range(pixels.shape[2]):
        plane = Image.fromarray(np.ascontiguousarray(pixels[:, :, c], dtype=np.float32))
        resized = plane.resize((width, height), resample=Image.Resampling.BICUBIC)
        channels.append(np.asarray(resized, dtype=np.float64))
    return np.stack(channels, axis=-1)


def resize(frame: Frame, scale: float) -> Frame:
    if scale <= 0:
        raise InvalidInputError(f"scale must be > 0, got {scale}")
    w, h = _round_dim(scale * frame.width), _round_dim(scale * frame.height)
    if min(w, h) < settings.MIN_FRAME_SIDE:
        raise InvalidInputError(
            f"resized frame {w}x{h} smaller than {settings.MIN_FRAME_SIDE} px"
        )
    if (w, h) == (frame.width, frame.height):
        return frame.copy()
    return Frame(quantize(bicubic_resample(frame.pixels, w, h)))


def zoom(frame: Frame, factor: float) -> Frame:
    """Bicubic upscale by ``factor`` then crop the centre back to the input size."""
    if factor <= 1:
        raise InvalidInputError(f"zoom factor must be > 1, got {factor}")
    w, h = frame.width, frame.height
    big_w, big_h = _round_dim(factor * w), _round_dim(factor * h)
    big = bicubic_resample(frame.pixels, big_w, big_h)
    left, top = (big_w - w) // 2, (big_h - h) // 2
    return Frame(quantize(big[top : top + h, left : left + w]))


def rotate(frame: Frame, degrees: float) -> Frame:
    """Rotate about the centre, keeping dimensions; uncovered samples replicate edges.

    With ``ROTATE_CROP`` set, the largest axis-aligned centred rectangle free
    of border fill is cropped and scaled back to the input size.
    """
    if abs(degrees) >= 45:
        raise InvalidInputError(f"|degrees| must be < 45, got {degrees}")
    if degrees == 0:
        return frame.copy()
    w, h = frame.width, frame.height
    matrix = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), float(degrees), 1.0)
    rotated = cv2.warpAffine(
        frame.pixels.astype(np.float32),
        matrix,
        (w, h),
        flags=cv2.INTER_CUBIC,
        borderMode=cv2.BORDER_REPLICATE,
    ).astype(np.float64)
    if settings.ROTATE_CROP:
        cw, ch = _inner_rectangle(w, h, np.deg2rad(abs(degrees)))
        left, top = (w - cw) // 2, (h - ch) // 2
        rotated = bicubic_resample(rotated[top : top + ch, left : left + cw], w, h)
    return Frame(quantize(rotated))


def _inner_rectangle(w: int, h: int, theta: float) -> tuple[int, int]:
    """Largest centred rectangle with the frame's aspect inside the rotated frame."""
    cos, sin = np.cos(theta), np.sin(theta)
    scale = min(w / (w * cos + h * sin), h / (w * sin + h * cos))
    return max(1, int(w * scale)), max(1, int(h * scale))
