"""Tests for the SMO-trained RBF SVM and its grid search."""

from __future__ import annotations

import logging

import numpy as np
import pytest
from sklearn.svm import SVC

from vbgdetect.detectors.svm import (
    decision_function,
    grid_search_cv,
    load_svm,
    rbf_kernel,
    save_svm,
    svm_predict,
    svm_train,
)
from vbgdetect.errors import InvalidInputError


def _blobs(n: int, dim: int = 5, spread: float = 2.0, seed: int = 0):
    gen = np.random.default_rng(seed)
    y = (np.arange(n) % 2).astype(np.int64)
    centres = np.where(y[:, None] == 1, spread, -spread)
    return centres + gen.standard_normal((n, dim)), y


@pytest.fixture
def blobs():
    return _blobs(120)


@pytest.fixture
def overlapping():
    return _blobs(60, dim=2, spread=0.6, seed=3)


# ------------------------------------------------------------------
# Kernel
# ------------------------------------------------------------------


def test_rbf_kernel_symmetric_with_unit_diagonal(rng):
    x = rng.standard_normal((7, 3))
    K = rbf_kernel(x, x, 0.5)
    np.testing.assert_allclose(K, K.T)
    np.testing.assert_allclose(np.diag(K), 1.0)
    assert np.all((K > 0) & (K <= 1))


# ------------------------------------------------------------------
# Solver
# ------------------------------------------------------------------


def test_two_points_split_at_midpoint():
    x = np.array([[0.0], [1.0]])
    model = svm_train(x, [0, 1], C=10.0, kernel_gamma=1.0, standardize=False)
    assert model.converged
    assert model.support_vectors.shape == (2, 1)
    np.testing.assert_allclose(model.alphas[0], model.alphas[1])
    targets, margins = svm_predict(model, np.array([[0.0], [1.0], [0.5]]))
    assert targets[:2].tolist() == [0, 1]
    assert margins[2] == pytest.approx(0.0, abs=1e-9)


def test_two_far_apart_points_are_both_support_vectors():
    x = np.array([[0.0, 0.0], [10.0, 10.0]])
    model = svm_train(x, [1, 0], C=1.0, kernel_gamma=0.1)
    assert model.support_vectors.shape[0] == 2
    targets, margins = svm_predict(model, np.vstack([x, [[5.0, 5.0]]]))
    assert targets[:2].tolist() == [1, 0]
    assert margins[0] > 0 > margins[1]
    assert margins[2] == pytest.approx(0.0, abs=1e-6)


def test_duplicated_dataset_keeps_the_decision():
    x, y = _blobs(40, dim=2, spread=2.5, seed=1)
    single = svm_train(x, y, C=100.0, kernel_gamma=0.5, tol=1e-6)
    double = svm_train(np.repeat(x, 2, axis=0), np.repeat(y, 2), C=100.0, kernel_gamma=0.5, tol=1e-6)
    axis = np.linspace(-5.0, 5.0, 21)
    grid = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
    f_single = decision_function(single, grid)
    f_double = decision_function(double, grid)
    clear = np.abs(f_single) > 1e-2
    assert clear.mean() > 0.95
    np.testing.assert_array_equal(np.sign(f_single[clear]), np.sign(f_double[clear]))


def test_free_support_vectors_sit_on_the_margin(overlapping):
    x, y = overlapping
    tol = 1e-3
    model = svm_train(x, y, C=1.0, kernel_gamma=0.5, tol=tol)
    free = model.alphas < model.C
    assert free.any()
    raw = model.support_vectors[free] * model.scaler_scale + model.scaler_mean
    _, margins = svm_predict(model, raw)
    np.testing.assert_allclose(np.abs(margins), 1.0, atol=tol + 1e-6)


def test_separable_blobs_are_learned(blobs):
    x, y = blobs
    model = svm_train(x[:80], y[:80], C=1.0, kernel_gamma=0.1)
    targets, _ = svm_predict(model, x[80:])
    assert np.mean(targets == y[80:]) >= 0.99


def test_kkt_conditions_hold_within_tolerance(overlapping):
    x, y = overlapping
    tol = 1e-3
    model = svm_train(x, y, C=1.0, kernel_gamma=0.5, tol=tol)
    assert model.converged
    signed = np.where(y == 1, 1.0, -1.0)
    yf = signed * decision_function(model, x)

    xs = model.standardize(x)
    matches = np.all(np.isclose(xs[:, None, :], model.support_vectors[None]), axis=2)
    alpha = np.zeros(len(y))
    for row, col in zip(*np.nonzero(matches)):
        alpha[row] = model.alphas[col]

    slack = tol + 1e-9
    assert np.all(yf[alpha == 0] >= 1 - slack)
    at_bound = alpha >= model.C
    free = (alpha > 0) & ~at_bound
    assert np.all(np.abs(yf[free] - 1) <= slack)
    assert np.all(yf[at_bound] <= 1 + slack)
    assert np.all((model.alphas > 0) & (model.alphas <= model.C))


def test_dual_equality_constraint(overlapping):
    x, y = overlapping
    model = svm_train(x, y, C=2.0, kernel_gamma=0.5)
    assert abs(model.dual_coef.sum()) < 1e-9


def test_matches_reference_solver(overlapping):
    x, y = overlapping
    ours = svm_train(x, y, C=1.0, kernel_gamma=0.5, tol=1e-6, standardize=False)
    ref = SVC(C=1.0, kernel="rbf", gamma=0.5, tol=1e-6).fit(x, y)
    np.testing.assert_allclose(decision_function(ours, x), ref.decision_function(x), atol=1e-3)


def test_iteration_cap_returns_unconverged_model(overlapping, caplog):
    x, y = overlapping
    with caplog.at_level(logging.WARNING, logger="vbgdetect.detectors.svm"):
        model = svm_train(x, y, C=1.0, kernel_gamma=0.5, max_iter=1)
    assert not model.converged
    assert model.iterations == 1
    assert "iteration cap" in caplog.text


def test_invalid_training_input():
    x = np.zeros((4, 2))
    with pytest.raises(InvalidInputError):
        svm_train(x, [1, 1, 1, 1], C=1.0, kernel_gamma=1.0)
    with pytest.raises(InvalidInputError):
        svm_train(x, [0, 1, 0, 1], C=0.0, kernel_gamma=1.0)
    with pytest.raises(InvalidInputError):
        svm_train(x, [0, 1, 0], C=1.0, kernel_gamma=1.0)


def test_predict_rejects_wrong_dimension(blobs):
    x, y = blobs
    model = svm_train(x, y, C=1.0, kernel_gamma=0.1)
    with pytest.raises(InvalidInputError):
        decision_function(model, np.zeros((1, 3)))


# ------------------------------------------------------------------
# Grid search
# ------------------------------------------------------------------


def test_grid_search_is_deterministic(overlapping):
    x, y = overlapping
    a = grid_search_cv(x, y, [0.5, 2.0], [0.25, 1.0], folds=3, seed=7)
    b = grid_search_cv(x, y, [2.0, 0.5], [1.0, 0.25], folds=3, seed=7)
    assert (a.C, a.gamma, a.cv_accuracy) == (b.C, b.gamma, b.cv_accuracy)
    assert len(a.scores) == 4
    assert a.cv_accuracy == max(a.scores.values())


def test_grid_search_single_point(overlapping):
    x, y = overlapping
    result = grid_search_cv(x, y, [1.0], [0.5], folds=3)
    assert (result.C, result.gamma) == (1.0, 0.5)


def test_grid_search_ties_prefer_small_values(blobs):
    x, y = blobs
    result = grid_search_cv(x, y, [4.0, 1.0], [0.1, 0.05], folds=3)
    assert result.cv_accuracy == 1.0
    assert (result.C, result.gamma) == (1.0, 0.05)


def test_grid_search_needs_enough_samples_per_class():
    x = np.arange(8, dtype=np.float64).reshape(4, 2)
    with pytest.raises(InvalidInputError):
        grid_search_cv(x, [0, 0, 1, 1], [1.0], [1.0], folds=5)


# ------------------------------------------------------------------
# Persistence
# ------------------------------------------------------------------


def test_saved_model_gives_identical_margins(tmp_path, blobs):
    x, y = blobs
    model = svm_train(x, y, C=1.0, kernel_gamma=0.1)
    model.meta["cv_accuracy"] = 0.9
    path = save_svm(model, tmp_path / "m.svm.json")
    assert (tmp_path / "m.svm.sv").is_file()
    loaded = load_svm(path)
    np.testing.assert_array_equal(decision_function(loaded, x), decision_function(model, x))
    assert loaded.meta == {"cv_accuracy": 0.9}
