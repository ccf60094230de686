"""Six-band co-occurrence tensor: three spatial planes, three cross-band planes.

Spatial planes count intensity pairs inside one channel at displacement
(1, 1); cross-band planes count co-located pairs between two channels.
Planes are ordered ``[R, G, B, RG, RB, GB]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from vbgdetect.errors import InvalidInputError
from vbgdetect.imaging.frame import ChannelPlane, Frame, split_channels

logger = logging.getLogger(__name__)

LEVELS = 256
SPATIAL_DISPLACEMENT = (1, 1)
CROSSBAND_DISPLACEMENT = (0, 0)
PLANE_NAMES = ("R", "G", "B", "RG", "RB", "GB")
_CROSS_PAIRS = ((0, 1), (0, 2), (1, 2))


class PlaneKind(str, Enum):
    SPATIAL = "spatial"
    CROSSBAND = "crossband"


@dataclass(frozen=True, eq=False)
class CoMatPlane:
    """One co-occurrence histogram; ``bins[i, j]`` counts pairs (i, j)."""

    bins: np.ndarray
    kind: PlaneKind
    displacement: tuple[int, int]
    channels: str = ""

    @property
    def total(self):
        return self.bins.sum()


@dataclass(frozen=True, eq=False)
class CoMatTensor:
    """Six stacked planes, shape ``(6, bin_count, bin_count)``."""

    planes: np.ndarray
    normalized: bool
    width: int
    height: int

    @property
    def bin_count(self) -> int:
        return self.planes.shape[-1]

    def as_hwc(self) -> np.ndarray:
        """Channels-last ``bin_count x bin_count x 6`` view."""
        return np.moveaxis(self.planes, 0, -1)

    def plane(self, name: str) -> CoMatPlane:
        idx = PLANE_NAMES.index(name)
        kind = PlaneKind.SPATIAL if idx < 3 else PlaneKind.CROSSBAND
        disp = SPATIAL_DISPLACEMENT if idx < 3 else CROSSBAND_DISPLACEMENT
        return CoMatPlane(self.planes[idx], kind, disp, name)


def _pair_counts(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    codes = first.astype(np.int64) * LEVELS + second.astype(np.int64)
    return np.bincount(codes.ravel(), minlength=LEVELS * LEVELS).reshape(LEVELS, LEVELS)


def _displaced_views(
    a: np.ndarray, b: np.ndarray, displacement: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    dx, dy = displacement
    h, w = a.shape
    if dx < 0 or dy < 0:
        raise InvalidInputError(f"displacement must be non-negative, got {displacement}")
    if dx >= w or dy >= h:
        raise InvalidInputError(
            f"displacement {displacement} exceeds plane dimensions {w}x{h}"
        )
    return a[: h - dy, : w - dx], b[dy:, dx:]


def spatial_comat(
    plane: ChannelPlane, displacement: tuple[int, int] = SPATIAL_DISPLACEMENT
) -> CoMatPlane:
    """Count pairs ``(plane[y, x], plane[y + dy, x + dx])`` over in-bounds positions."""
    first, second = _displaced_views(plane.samples, plane.samples, displacement)
    return CoMatPlane(_pair_counts(first, second), PlaneKind.SPATIAL, tuple(displacement))


def crossband_comat(
    plane_a: ChannelPlane,
    plane_b: ChannelPlane,
    displacement: tuple[int, int] = CROSSBAND_DISPLACEMENT,
) -> CoMatPlane:
    """Count pairs ``(a[y, x], b[y + dy, x + dx])``."""
    if plane_a.samples.shape != plane_b.samples.shape:
        raise InvalidInputError(
            f"cross-band planes differ in size: {plane_a.samples.shape} vs {plane_b.samples.shape}"
        )
    first, second = _displaced_views(plane_a.samples, plane_b.samples, displacement)
    return CoMatPlane(_pair_counts(first, second), PlaneKind.CROSSBAND, tuple(displacement))


def build_tensor(frame: Frame, normalize: bool = True) -> CoMatTensor:
    channels = split_channels(frame)
    planes = [spatial_comat(c, SPATIAL_DISPLACEMENT).bins for c in channels]
    planes += [
        crossband_comat(channels[i], channels[j], CROSSBAND_DISPLACEMENT).bins
        for i, j in _CROSS_PAIRS
    ]
    tensor = CoMatTensor(np.stack(planes), False, frame.width, frame.height)
    return normalize_tensor(tensor) if normalize else tensor


def normalize_tensor(t: CoMatTensor) -> CoMatTensor:
    """Divide each plane by its own total; empty planes stay zero."""
    if t.normalized:
        return t
    planes = t.planes.astype(np.float64)
    totals = planes.sum(axis=(1, 2), keepdims=True)
    planes = np.divide(planes, totals, out=np.zeros_like(planes), where=totals > 0)
    return replace(t, planes=planes, normalized=True)


def rebin_tensor(t: CoMatTensor, new_bins: int) -> CoMatTensor:
    """Sum counts over contiguous intensity blocks of size ``bin_count // new_bins``."""
    old = t.bin_count
    if new_bins < 1 or old % new_bins:
        raise InvalidInputError(f"{new_bins} bins does not divide {old}")
    f = old // new_bins
    if f == 1:
        return t
    coarse = t.planes.reshape(6, new_bins, f, new_bins, f).sum(axis=(2, 4))
    return replace(t, planes=coarse)


def prepare_cnn_input(frame: Frame, bins: int) -> CoMatTensor:
    """Raw tensor, rebinned, then normalized so each plane sums to one."""
    return normalize_tensor(rebin_tensor(build_tensor(frame, normalize=False), bins))


def render_planes(t: CoMatTensor, out_dir: str | Path, stem: str = "comat") -> list[Path]:
    """Write each plane as a log-scaled 8-bit grayscale PNG."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for name, plane in zip(PLANE_NAMES, t.planes):
        img = np.log1p(plane.astype(np.float64))
        peak = img.max()
        if peak > 0:
            img = img / peak
        path = out / f"{stem}_{name}.png"
        Image.fromarray(np.round(img * 255.0).astype(np.uint8)).save(path, format="PNG")
        paths.append(path)
    logger.info("Rendered %d co-occurrence planes to %s", len(paths), out)
    return paths
