"""Tests for the detector contract and its two implementations."""

from __future__ import annotations

import numpy as np
import pytest

from convnet import Architecture, ConvSpec, TrainConfig
from vbgdetect.detectors import (
    CnnComatDetector,
    Confusion,
    SvmCrspamDetector,
    detector_class,
    load_detector,
)


@pytest.fixture
def cnn():
    arch = Architecture(input_bins=16, convs=[ConvSpec(4, 3, pool=3)], dense=[8], dense_dropout=0.0)
    return CnnComatDetector(arch=arch, train_config=TrainConfig(epochs=0))


def test_confusion_counts():
    c = Confusion.from_predictions(np.array([1, 1, 0, 0, 1]), np.array([1, 0, 0, 1, 1]))
    assert (c.tp, c.tn, c.fp, c.fn) == (2, 1, 1, 1)


def test_registry_maps_kinds_to_classes():
    assert detector_class("cnn_comat") is CnnComatDetector
    assert detector_class("svm_crspam") is SvmCrspamDetector
    with pytest.raises(ValueError):
        detector_class("knn")


def test_cnn_extracts_normalized_planes(cnn, noisy_frame):
    x = cnn.extract(noisy_frame)
    assert x.shape == (6, 16, 16) and x.dtype == np.float32
    np.testing.assert_allclose(x.sum(axis=(1, 2)), 1.0, rtol=1e-5)
    assert cnn.logger.name == "detector.cnn_comat"


def test_zero_epoch_fine_tune_keeps_weights(cnn, make_frame):
    frames = [make_frame(24, 24, seed=s) for s in range(4)]
    x = cnn.extract_batch(frames)
    before = [p.copy() for _, p in cnn.model.parameters()]
    fit = cnn.fit(x, np.array([0, 1, 0, 1]))
    assert fit.data["epochs"] == 0
    assert 0.0 <= fit.train_accuracy <= 1.0
    for a, (_, b) in zip(before, cnn.model.parameters()):
        np.testing.assert_array_equal(a, b)


def test_cnn_save_and_load(tmp_path, cnn, make_frame):
    x = cnn.extract_batch([make_frame(24, 24, seed=s) for s in range(3)])
    path = cnn.save(tmp_path / "d.vbgm")
    loaded = load_detector("cnn_comat", path)
    assert loaded.bins == 16
    np.testing.assert_array_equal(loaded.predict_proba(x), cnn.predict_proba(x))


def test_svm_detector_grid_search_and_reload(tmp_path, monkeypatch):
    from vbgdetect.grids import experiment_grid

    monkeypatch.setattr(experiment_grid, "svm_c_grid", [1.0, 4.0])
    monkeypatch.setattr(experiment_grid, "svm_gamma_grid", [0.01])
    monkeypatch.setattr(experiment_grid, "svm_folds", 3)

    gen = np.random.default_rng(0)
    y = np.arange(30) % 2
    x = gen.standard_normal((30, 6)) + 3.0 * y[:, None]
    detector = SvmCrspamDetector(seed=1)
    fit = detector.fit(x, y)
    assert fit.data["gamma"] == 0.01
    assert fit.data["C"] in (1.0, 4.0)
    assert 0.0 <= fit.data["cv_accuracy"] <= 1.0
    assert fit.train_accuracy >= 0.9

    path = detector.save(tmp_path / "d.svm.json")
    loaded = load_detector("svm_crspam", path)
    np.testing.assert_array_equal(loaded.predict(x), detector.predict(x))
    assert detector.confusion(x, y).tp + detector.confusion(x, y).fn == 15
