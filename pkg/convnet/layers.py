"""Layers of the co-occurrence CNN, batch-first ``(N, C, H, W)``.

Every layer caches what its backward pass needs during ``forward`` and
exposes ``params`` / ``grads`` dictionaries keyed by parameter name.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from vbgdetect.errors import InvalidInputError


class Layer:
    name = "layer"

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pattern(self) -> np.ndarray | None:
        """Discrete routing state of the last forward pass (ReLU masks, pool argmaxes)."""
        return None


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class InputScaling(Layer):
    """``log1p(x * bins^2)``: lifts normalized co-occurrence counts to order one."""

    name = "scale"

    def __init__(self, bins: int) -> None:
        super().__init__()
        self.factor = float(bins * bins)
        self._x: np.ndarray | None = None

    def forward(self, x, train, rng):
        self._x = x
        return np.log1p(x * self.factor)

    def backward(self, dy):
        return dy * self.factor / (1.0 + self._x * self.factor)


class Conv2D(Layer):
    """Stride-1 convolution with 'same' zero padding, im2col per sample.

    Only the padded input is cached; columns are rebuilt in ``backward`` so
    memory stays bounded for large bin counts.
    """

    name = "conv"

    def __init__(self, in_channels: int, filters: int, kernel: int, rng: np.random.Generator, dtype) -> None:
        super().__init__()
        self.in_channels = in_channels
        self.filters = filters
        self.kernel = kernel
        self.pad = kernel // 2
        fan_in = in_channels * kernel * kernel
        self.params["weight"] = he_uniform(rng, (filters, in_channels, kernel, kernel), fan_in, dtype)
        self.params["bias"] = np.zeros(filters, dtype=dtype)
        self.propagate = True  # False on the first layer: no input gradient needed
        self._xp: np.ndarray | None = None

    def _cols(self, xp_i: np.ndarray, h: int, w: int) -> np.ndarray:
        k = self.kernel
        windows = sliding_window_view(xp_i, (k, k), axis=(1, 2))  # (C, H, W, k, k)
        return windows.transpose(1, 2, 0, 3, 4).reshape(h * w, self.in_channels * k * k)

    def forward(self, x, train, rng):
        n, c, h, w = x.shape
        if c != self.in_channels:
            raise InvalidInputError(f"conv expects {self.in_channels} channels, got {c}")
        p = self.pad
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        wmat = self.params["weight"].reshape(self.filters, -1)
        out = np.empty((n, self.filters, h, w), dtype=np.result_type(x, wmat))
        for i in range(n):
            out[i] = (self._cols(xp[i], h, w) @ wmat.T).T.reshape(self.filters, h, w)
        out += self.params["bias"][None, :, None, None]
        self._xp = xp
        return out

    def backward(self, dy):
        xp = self._xp
        n, _, h, w = dy.shape
        k, p = self.kernel, self.pad
        wmat = self.params["weight"].reshape(self.filters, -1)
        dw = np.zeros_like(wmat)
        dxp = np.zeros_like(xp) if self.propagate else None
        for i in range(n):
            g = dy[i].reshape(self.filters, h * w)
            dw += g @ self._cols(xp[i], h, w)
            if dxp is not None:
                dcols = (g.T @ wmat).reshape(h, w, self.in_channels, k, k)
                for a in range(k):
                    for b in range(k):
                        dxp[i, :, a : a + h, b : b + w] += dcols[:, :, :, a, b].transpose(2, 0, 1)
        self.grads["weight"] = dw.reshape(self.params["weight"].shape)
        self.grads["bias"] = dy.sum(axis=(0, 2, 3))
        if dxp is None:
            return np.zeros((n, self.in_channels, h, w), dtype=dy.dtype)
        return dxp[:, :, p : p + h, p : p + w]


class ReLU(Layer):
    name = "relu"

    def __init__(self) -> None:
        super().__init__()
        self._mask: np.ndarray | None = None

    def forward(self, x, train, rng):
        self._mask = x > 0
        return np.where(self._mask, x, 0).astype(x.dtype, copy=False)

    def backward(self, dy):
        return dy * self._mask

    def pattern(self):
        return self._mask


class MaxPool2D(Layer):
    """Non-overlapping max-pool; trailing rows/cols that do not fill a window are dropped."""

    name = "pool"

    def __init__(self, size: int) -> None:
        super().__init__()
        self.size = size
        self._shape: tuple[int, ...] | None = None
        self._argmax: np.ndarray | None = None

    def forward(self, x, train, rng):
        n, c, h, w = x.shape
        s = self.size
        oh, ow = h // s, w // s
        if oh == 0 or ow == 0:
            raise InvalidInputError(f"{h}x{w} input too small for {s}x{s} pooling")
        blocks = (
            x[:, :, : oh * s, : ow * s]
            .reshape(n, c, oh, s, ow, s)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, oh, ow, s * s)
        )
        self._argmax = blocks.argmax(axis=-1)
        self._shape = x.shape
        return np.take_along_axis(blocks, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        n, c, h, w = self._shape
        s = self.size
        oh, ow = dy.shape[2], dy.shape[3]
        blocks = np.zeros((n, c, oh, ow, s * s), dtype=dy.dtype)
        np.put_along_axis(blocks, self._argmax[..., None], dy[..., None], axis=-1)
        dx = np.zeros(self._shape, dtype=dy.dtype)
        dx[:, :, : oh * s, : ow * s] = (
            blocks.reshape(n, c, oh, ow, s, s).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh * s, ow * s)
        )
        return dx

    def pattern(self):
        return self._argmax


class Dropout(Layer):
    """Inverted dropout: kept units are scaled by ``1 / (1 - rate)`` in training."""

    name = "dropout"

    def __init__(self, rate: float) -> None:
        super().__init__()
        self.rate = rate
        self.frozen = False
        self._mask: np.ndarray | None = None

    def forward(self, x, train, rng):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if not (self.frozen and self._mask is not None and self._mask.shape == x.shape):
            if rng is None:
                raise InvalidInputError("train-mode dropout needs a random generator")
            keep = rng.random(x.shape) >= self.rate
            self._mask = keep.astype(x.dtype) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


class Flatten(Layer):
    name = "flatten"

    def __init__(self) -> None:
        super().__init__()
        self._shape: tuple[int, ...] | None = None

    def forward(self, x, train, rng):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


class Dense(Layer):
    name = "dense"

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, dtype) -> None:
        super().__init__()
        self.params["weight"] = he_uniform(rng, (in_features, out_features), in_features, dtype)
        self.params["bias"] = np.zeros(out_features, dtype=dtype)
        self._x: np.ndarray | None = None

    def forward(self, x, train, rng):
        self._x = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, dy):
        self.grads["weight"] = self._x.T @ dy
        self.grads["bias"] = dy.sum(axis=0)
        return dy @ self.params["weight"].T
