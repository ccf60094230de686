"""Frame and single-channel plane containers plus colour helpers.

Frames are 8-bit RGB rasters stored as ``(height, width, 3)`` uint8 arrays.
Float filters re-quantize through :func:`quantize` so every operation in the
toolkit rounds the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vbgdetect.errors import InvalidInputError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601


def quantize(values: np.ndarray) -> np.ndarray:
    """Round half away from zero, clamp to [0, 255], return uint8."""
    v = np.asarray(values, dtype=np.float64)
    rounded = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Frame:
    """8-bit, 3-channel raster image."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise InvalidInputError(f"frame must be HxWx3, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise InvalidInputError(f"frame samples must be uint8, got {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidInputError("frame must have at least one pixel")
        object.__setattr__(self, "pixels", np.ascontiguousarray(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> np.ndarray:
        """Row-major flat (R, G, B, R, G, B, ...) view."""
        return self.pixels.reshape(-1)

    def same_as(self, other: Frame) -> bool:
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def copy(self) -> Frame:
        return Frame(self.pixels.copy())

    @classmethod
    def from_float(cls, values: np.ndarray) -> Frame:
        return cls(quantize(values))


@dataclass(frozen=True, eq=False)
class ChannelPlane:
    """Single-channel 8-bit plane."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.samples)
        if s.ndim != 2:
            raise InvalidInputError(f"plane must be 2-D, got shape {s.shape}")
        if s.dtype != np.uint8:
            raise InvalidInputError(f"plane samples must be uint8, got {s.dtype}")
        object.__setattr__(self, "samples", np.ascontiguousarray(s))

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


def split_channels(frame: Frame) -> tuple[ChannelPlane, ChannelPlane, ChannelPlane]:
    """Return the R, G and B planes, in that order."""
    px = frame.pixels
    return (
        ChannelPlane(px[:, :, 0].copy()),
        ChannelPlane(px[:, :, 1].copy()),
        ChannelPlane(px[:, :, 2].copy()),
    )


def recompose(r: ChannelPlane, g: ChannelPlane, b: ChannelPlane) -> Frame:
    if not (r.samples.shape == g.samples.shape == b.samples.shape):
        raise InvalidInputError("planes must share dimensions")
    return Frame(np.stack([r.samples, g.samples, b.samples], axis=-1))


def luma_float(frame: Frame) -> np.ndarray:
    px = frame.pixels.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    return wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2]


def to_luma(frame: Frame) -> ChannelPlane:
    """BT.601 luma, rounded and clamped to [0, 255]."""
    return ChannelPlane(quantize(luma_float(frame)))
