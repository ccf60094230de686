"""The co-occurrence CNN: construction, forward/backward and batched inference."""

from __future__ import annotations

import logging
from collections.abc import Iterator

import numpy as np
from scipy.special import expit

from convnet.config import Architecture
from convnet.layers import Conv2D, Dense, Dropout, Flatten, InputScaling, Layer, MaxPool2D, ReLU
from vbgdetect.errors import InvalidInputError, StaleActivationError

logger = logging.getLogger(__name__)

PROB_EPS = 1e-7  # probabilities are clamped to [eps, 1 - eps]


def build_layers(arch: Architecture, rng: np.random.Generator, dtype) -> list[Layer]:
    layers: list[Layer] = []
    if arch.input_scaling:
        layers.append(InputScaling(arch.input_bins))
    channels, size = arch.in_channels, arch.input_bins
    for spec in arch.convs:
        conv = Conv2D(channels, spec.filters, spec.kernel, rng, dtype)
        layers.append(conv)
        if spec.relu:
            layers.append(ReLU())
        if spec.pool:
            layers.append(MaxPool2D(spec.pool))
            size //= spec.pool
        if spec.dropout:
            layers.append(Dropout(spec.dropout))
        channels = spec.filters
    if size < 1:
        raise InvalidInputError(f"{arch.input_bins} bins too small for the pooling stack")

    layers.append(Flatten())
    features = channels * size * size
    for i, width in enumerate(arch.dense):
        layers.append(Dense(features, width, rng, dtype))
        layers.append(ReLU())
        if i == len(arch.dense) - 1 and arch.dense_dropout:
            layers.append(Dropout(arch.dense_dropout))
        features = width
    layers.append(Dense(features, 1, rng, dtype))

    first_conv = next((layer for layer in layers if isinstance(layer, Conv2D)), None)
    if first_conv is not None:
        first_conv.propagate = False
    return layers


class CnnModel:
    """Binary classifier over ``(6, B, B)`` co-occurrence tensors.

    ``forward`` in train mode caches activations for exactly one ``backward``;
    any parameter update or eval pass in between invalidates that cache.
    """

    def __init__(self, arch: Architecture | None = None, seed: int = 0, dtype=np.float32) -> None:
        self.arch = arch or Architecture()
        self.dtype = np.dtype(dtype)
        self.layers = build_layers(self.arch, np.random.default_rng(seed), self.dtype)
        self.version = 0
        self._cache: tuple[int, np.ndarray, np.ndarray] | None = None

    # ── Parameters ──

    def parameters(self) -> Iterator[tuple[str, np.ndarray]]:
        for i, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                yield f"{i}.{layer.name}.{name}", value

    def gradients(self) -> Iterator[tuple[str, np.ndarray]]:
        for i, layer in enumerate(self.layers):
            for name in layer.params:
                yield f"{i}.{layer.name}.{name}", layer.grads[name]

    def bump_version(self) -> None:
        """Mark parameters as modified; pending activations become stale."""
        self.version += 1

    def freeze_dropout(self, frozen: bool = True) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.frozen = frozen

    def activation_pattern(self) -> list[np.ndarray]:
        return [p.copy() for layer in self.layers if (p := layer.pattern()) is not None]

    # ── Passes ──

    def as_batch(self, x) -> np.ndarray:
        """Accept a tensor object with ``.planes``, a ``(6, B, B)`` array or a batch."""
        arr = np.asarray(getattr(x, "planes", x), dtype=self.dtype)
        if arr.ndim == 3:
            arr = arr[None]
        expected = (self.arch.in_channels, self.arch.input_bins, self.arch.input_bins)
        if arr.ndim != 4 or arr.shape[1:] != expected:
            raise InvalidInputError(f"expected input shape (N, {expected}), got {arr.shape}")
        return arr

    def logits(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        out = x
        for layer in self.layers:
            out = layer.forward(out, train, rng)
        return out[:, 0]

    def forward(self, x, mode: str = "eval", rng: np.random.Generator | None = None) -> np.ndarray:
        """Probabilities of the 'virtual' class, one per sample."""
        if mode not in ("train", "eval"):
            raise InvalidInputError(f"mode must be 'train' or 'eval', got '{mode}'")
        batch = self.as_batch(x)
        train = mode == "train"
        z = self.logits(batch, train, rng).astype(np.float64)
        raw = expit(z)
        if train:
            self._cache = (self.version, batch, raw)
        else:
            self._cache = None
        return np.clip(raw, PROB_EPS, 1.0 - PROB_EPS)

    def backward(self, x, labels) -> list[np.ndarray]:
        """Gradients of mean BCE for the batch last passed to ``forward(mode='train')``."""
        if self._cache is None:
            raise StaleActivationError("backward needs a preceding train-mode forward")
        version, batch, raw = self._cache
        if version != self.version:
            raise StaleActivationError("parameters changed since the forward pass")
        if not np.array_equal(self.as_batch(x), batch):
            raise StaleActivationError("backward input differs from the forward input")
        y = np.asarray(labels, dtype=np.float64).reshape(-1)
        if y.shape[0] != raw.shape[0]:
            raise InvalidInputError(f"{y.shape[0]} labels for {raw.shape[0]} samples")
        self._cache = None

        unclamped = (raw > PROB_EPS) & (raw < 1.0 - PROB_EPS)
        dz = np.where(unclamped, (raw - y) / y.shape[0], 0.0)
        grad = dz.astype(self.dtype)[:, None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return [g for _, g in self.gradients()]

    # ── Inference ──

    def predict_proba(self, x, batch_size: int = 32) -> np.ndarray:
        batch = self.as_batch(x)
        out = np.empty(batch.shape[0], dtype=np.float64)
        for start in range(0, batch.shape[0], batch_size):
            out[start : start + batch_size] = self.forward(batch[start : start + batch_size], "eval")
        return out

    def evaluate(self, x, labels, batch_size: int = 32) -> tuple[float, float]:
        """Mean BCE loss and accuracy at threshold 0.5."""
        y = np.asarray(labels, dtype=np.float64).reshape(-1)
        p = self.predict_proba(x, batch_size)
        return bce_loss(p, y), float(np.mean((p >= 0.5) == (y == 1)))


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(np.asarray(p, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def forward(model: CnnModel, x, mode: str = "eval", rng: np.random.Generator | None = None) -> np.ndarray:
    return model.forward(x, mode, rng)


def backward(model: CnnModel, x, labels) -> list[np.ndarray]:
    return model.backward(x, labels)
