"""CRSPAM1372: colour-rich SPAM features of truncated first-order residuals.

Layout of the 1372-vector::

    [intra: mean over R, G, B of SPAM686]            686
      [axis-direction Markov mean][diagonal mean]     343 + 343
    [cross: joint R/G/B residual co-occurrences]     686
      [axis-direction mean][diagonal mean]            343 + 343

Residuals are truncated to [-T, T] with T = 3 right after differencing;
pairs and triples that would cross the image border are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from vbgdetect.errors import InvalidInputError
from vbgdetect.imaging.frame import ChannelPlane, Frame, split_channels

T = 3
SPAN = 2 * T + 1  # 7 residual values
CELLS = SPAN**3  # 343
SPAM_DIM = 2 * CELLS  # 686
CRSPAM_DIM = 2 * SPAM_DIM  # 1372


class Direction(Enum):
    """Step (dy, dx) from a pixel to its neighbour along the direction."""

    RIGHT = (0, 1)
    LEFT = (0, -1)
    DOWN = (1, 0)
    UP = (-1, 0)
    DOWN_RIGHT = (1, 1)
    UP_LEFT = (-1, -1)
    DOWN_LEFT = (1, -1)
    UP_RIGHT = (-1, 1)

    @property
    def step(self) -> tuple[int, int]:
        return self.value


AXIS_DIRECTIONS = (Direction.RIGHT, Direction.LEFT, Direction.DOWN, Direction.UP)
DIAGONAL_DIRECTIONS = (
    Direction.DOWN_RIGHT,
    Direction.UP_LEFT,
    Direction.DOWN_LEFT,
    Direction.UP_RIGHT,
)


@dataclass(frozen=True, eq=False)
class ResidualMap:
    """Truncated residuals over the positions where the neighbour exists.

    ``values[i, j]`` belongs to image pixel ``(i + origin[0], j + origin[1])``.
    """

    values: np.ndarray
    direction: Direction
    origin: tuple[int, int]


@dataclass(frozen=True, eq=False)
class FeatureVector1372:
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (CRSPAM_DIM,):
            raise InvalidInputError(f"expected {CRSPAM_DIM} values, got {self.values.shape}")

    @property
    def intra(self) -> np.ndarray:
        return self.values[:SPAM_DIM]

    @property
    def cross(self) -> np.ndarray:
        return self.values[SPAM_DIM:]


def _aligned_views(
    arr: np.ndarray, step: tuple[int, int], n: int
) -> tuple[list[np.ndarray], tuple[int, int]]:
    """``n`` equally shaped views where view ``k`` is ``arr`` shifted by ``k * step``.

    Returns the views and the array index that view 0 starts at.
    """
    dy, dx = step
    h, w = arr.shape
    span_y, span_x = (n - 1) * abs(dy), (n - 1) * abs(dx)
    if span_y >= h or span_x >= w:
        raise InvalidInputError(
            f"{h}x{w} grid is too small for {n} samples along step {step}"
        )
    base_y = span_y if dy < 0 else 0
    base_x = span_x if dx < 0 else 0
    out_h, out_w = h - span_y, w - span_x
    views = []
    for k in range(n):
        y0, x0 = base_y + k * dy, base_x + k * dx
        views.append(arr[y0 : y0 + out_h, x0 : x0 + out_w])
    return views, (base_y, base_x)


def residual(plane: ChannelPlane, direction: Direction) -> ResidualMap:
    """``D = plane(p) - plane(p + step)`` truncated to [-T, T]."""
    dy, dx = direction.step
    if (dy and plane.height < 3) or (dx and plane.width < 3):
        raise InvalidInputError(
            f"plane {plane.width}x{plane.height} too small for direction {direction.name}"
        )
    (here, there), origin = _aligned_views(plane.samples.astype(np.int16), direction.step, 2)
    values = np.clip(here - there, -T, T).astype(np.int8)
    return ResidualMap(values, direction, origin)


def _codes(*maps: np.ndarray) -> np.ndarray:
    code = np.zeros(maps[0].shape, dtype=np.int64)
    for m in maps:
        code = code * SPAN + (m.astype(np.int64) + T)
    return code.ravel()


def spam_markov(residuals: ResidualMap, direction: Direction | None = None) -> np.ndarray:
    """Second-order Markov transition probabilities ``P(D[k+2]=u | D[k+1]=v, D[k]=w)``.

    Flattened with u varying slowest; cells whose conditioning pair never
    occurs are zero.
    """
    direction = direction or residuals.direction
    try:
        (d_k, d_k1, d_k2), _ = _aligned_views(residuals.values, direction.step, 3)
    except InvalidInputError as exc:
        raise InvalidInputError(f"no collinear residual triple: {exc.detail}") from exc
    counts = np.bincount(_codes(d_k2, d_k1, d_k), minlength=CELLS).astype(np.float64)
    counts = counts.reshape(SPAN, SPAN * SPAN)
    pair_totals = counts.sum(axis=0, keepdims=True)
    probs = np.divide(counts, pair_totals, out=np.zeros_like(counts), where=pair_totals > 0)
    return probs.ravel()


def spam686(plane: ChannelPlane) -> np.ndarray:
    """[mean Markov matrix over axis directions, mean over diagonal directions]."""
    f1 = np.mean([spam_markov(residual(plane, d), d) for d in AXIS_DIRECTIONS], axis=0)
    f2 = np.mean([spam_markov(residual(plane, d), d) for d in DIAGONAL_DIRECTIONS], axis=0)
    return np.concatenate([f1, f2])


def cross_cooc(res_r: ResidualMap, res_g: ResidualMap, res_b: ResidualMap) -> np.ndarray:
    """Joint relative frequency of co-located (R, G, B) residual triples."""
    if not (res_r.direction is res_g.direction is res_b.direction):
        raise InvalidInputError("cross-channel residuals must share a direction")
    if not (res_r.values.shape == res_g.values.shape == res_b.values.shape):
        raise InvalidInputError("cross-channel residuals must share geometry")
    counts = np.bincount(_codes(res_r.values, res_g.values, res_b.values), minlength=CELLS)
    return counts.astype(np.float64) / res_r.values.size


def crspam1372(frame: Frame) -> FeatureVector1372:
    planes = split_channels(frame)
    intra = np.mean([spam686(p) for p in planes], axis=0)

    cross_parts = []
    for group in (AXIS_DIRECTIONS, DIAGONAL_DIRECTIONS):
        blocks = []
        for d in group:
            res = [residual(p, d) for p in planes]
            blocks.append(cross_cooc(*res))
        cross_parts.append(np.mean(blocks, axis=0))

    return FeatureVector1372(np.concatenate([intra, *cross_parts]))
