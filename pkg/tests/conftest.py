"""Shared fixtures: seeded generators, small frames, tiny corpus configs."""

from __future__ import annotations

import numpy as np
import pytest

from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import CorpusConfig, SplitCounts


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_frame():
    def _make(height=32, width=32, seed=0):
        gen = np.random.default_rng(seed)
        return Frame(gen.integers(0, 256, size=(height, width, 3), dtype=np.uint8))

    return _make


@pytest.fixture
def noisy_frame(make_frame):
    return make_frame(32, 32, seed=7)


@pytest.fixture
def smooth_frame():
    """Horizontal gradient, useful where random noise would swamp a filter."""
    ramp = np.linspace(20, 230, 48)
    px = np.stack([np.tile(ramp, (40, 1))] * 3, axis=-1)
    px[:, :, 1] = px[:, :, 1][:, ::-1]
    return Frame(np.round(px).astype(np.uint8))


@pytest.fixture
def tiny_corpus_config():
    """A few dozen 48x48 frames per class; enough to exercise every stage quickly."""
    return CorpusConfig(
        seed=11,
        width=48,
        height=48,
        counts=SplitCounts(train=8, val=2, test=4),
        attack_counts=SplitCounts(train=4, val=0, test=4),
    )
