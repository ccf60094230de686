"""Intensity and neighbourhood filters: median, box blur, gamma, CLAHE, noise, sharpen.

Filters that compute in floating point go through ``quantize`` so results are
rounded half away from zero and clamped, independently of OpenCV's own
saturation rules.
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from vbgdetect.config import settings
from vbgdetect.errors import InvalidInputError
from vbgdetect.imaging.frame import Frame, luma_float, quantize

logger = logging.getLogger(__name__)


def _check_kernel(frame: Frame, k: int) -> int:
    k = int(k)
    if k < 1 or k % 2 == 0:
        raise InvalidInputError(f"kernel size must be a positive odd integer, got {k}")
    if k > min(frame.width, frame.height):
        raise InvalidInputError(
            f"kernel {k} larger than frame {frame.width}x{frame.height}"
        )
    return k


def median_filter(frame: Frame, k: int) -> Frame:
    """Per-channel ``k x k`` median; OpenCV replicates edges for medianBlur."""
    k = _check_kernel(frame, k)
    if k == 1:
        return frame.copy()
    return Frame(cv2.medianBlur(frame.pixels, k))


def average_blur(frame: Frame, k: int) -> Frame:
    k = _check_kernel(frame, k)
    blurred = cv2.blur(
        frame.pixels.astype(np.float64), (k, k), borderType=cv2.BORDER_REPLICATE
    )
    return Frame.from_float(blurred)


def gamma_correct(frame: Frame, gamma: float) -> Frame:
    """``v' = round(255 * (v / 255) ** gamma)`` through a 256-entry table."""
    if gamma <= 0:
        raise InvalidInputError(f"gamma must be > 0, got {gamma}")
    lut = quantize(255.0 * (np.arange(256, dtype=np.float64) / 255.0) ** gamma)
    return Frame(lut[frame.pixels])


def clahe(frame: Frame, clip_limit: float) -> Frame:
    """CLAHE on BT.601 luma; each channel is shifted by the luma change."""
    if clip_limit <= 0:
        raise InvalidInputError(f"clip_limit must be > 0, got {clip_limit}")
    y = luma_float(frame)
    y8 = quantize(y)
    if y8.min() == y8.max():
        # A flat luma plane is already equalized.
        return frame.copy()
    grid = settings.CLAHE_TILE_GRID
    equalizer = cv2.createCLAHE(clipLimit=float(clip_limit), tileGridSize=(grid, grid))
    y_eq = equalizer.apply(y8).astype(np.float64)
    shift = (y_eq - y)[:, :, None]
    return Frame.from_float(frame.pixels.astype(np.float64) + shift)


def gaussian_noise(frame: Frame, sigma: float, seed: int) -> Frame:
    """Add i.i.d. N(0, sigma^2) noise per sample from a seeded generator."""
    if sigma < 0:
        raise InvalidInputError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return frame.copy()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=frame.pixels.shape)
    return Frame.from_float(frame.pixels.astype(np.float64) + noise)


def sharpen(frame: Frame) -> Frame:
    """Unsharp mask with a fixed 3x3 Gaussian."""
    src = frame.pixels.astype(np.float64)
    sigma = settings.SHARPEN_SIGMA
    blurred = cv2.GaussianBlur(
        src, (3, 3), sigmaX=sigma, sigmaY=sigma, borderType=cv2.BORDER_REPLICATE
    )
    return Frame.from_float(src + settings.SHARPEN_AMOUNT * (src - blurred))
