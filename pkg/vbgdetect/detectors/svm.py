"""Gaussian-kernel soft-margin SVM trained with SMO, plus k-fold grid search.

The solver works on signed coefficients ``beta_i = y_i * alpha_i`` with box
``A_i <= beta_i <= B_i`` (``[0, C]`` for positives, ``[-C, 0]`` for
negatives) and the gradient ``g_i = y_i - sum_j K_ij beta_j``. Each step
moves the maximal violating pair: ``i = argmax g`` among coefficients that
can grow and ``j = argmin g`` among those that can shrink. Training stops
when ``g_i - g_j < tol``, which bounds every KKT violation by ``tol``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.model_selection import StratifiedKFold
from sklearn.preprocessing import StandardScaler

from vbgdetect.config import settings
from vbgdetect.errors import FrameFormatError, InvalidInputError, MissingArtifactError

logger = logging.getLogger(__name__)

TAU = 1e-12  # floor for the second-order step denominator
FORMAT_VERSION = 1


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, d), standardized
    alphas: np.ndarray  # in [0, C]
    labels: np.ndarray  # +1 / -1
    bias: float
    kernel_gamma: float
    C: float
    scaler_mean: np.ndarray
    scaler_scale: np.ndarray
    converged: bool = True
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.scaler_mean.shape[0]

    @property
    def dual_coef(self) -> np.ndarray:
        return self.alphas * self.labels

    def standardize(self, features: np.ndarray) -> np.ndarray:
        return (features - self.scaler_mean) / self.scaler_scale


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """``K(a, b) = exp(-gamma * ||a - b||^2)``; symmetric and 1 on the diagonal."""
    return np.exp(-gamma * cdist(a, b, metric="sqeuclidean"))


def _as_signed_labels(labels) -> np.ndarray:
    y = np.asarray(labels).reshape(-1)
    return np.where(y > 0, 1.0, -1.0)


def _check_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise InvalidInputError(f"features must be 2-D, got shape {x.shape}")
    return x


# ── Training ──


def svm_train(
    features,
    labels,
    C: float,
    kernel_gamma: float,
    tol: float | None = None,
    max_iter: int | None = None,
    standardize: bool = True,
) -> SvmModel:
    """Fit a soft-margin RBF SVM. Labels may be {0, 1} or {-1, +1}.

    If the iteration cap is reached the current solution is returned with
    ``converged=False`` and a warning is logged.
    """
    tol = settings.SVM_TOL if tol is None else tol
    max_iter = settings.SVM_MAX_ITER if max_iter is None else max_iter
    x = _check_features(features)
    y = _as_signed_labels(labels)
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"{y.shape[0]} labels for {x.shape[0]} samples")
    if x.shape[0] < 2 or not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidInputError("SVM training needs at least one sample of each class")
    if C <= 0 or kernel_gamma <= 0:
        raise InvalidInputError(f"C and gamma must be > 0, got C={C} gamma={kernel_gamma}")
    if max_iter < 1:
        raise InvalidInputError(f"max_iter must be >= 1, got {max_iter}")

    scaler = StandardScaler(with_mean=standardize, with_std=standardize).fit(x)
    mean = scaler.mean_ if standardize else np.zeros(x.shape[1])
    scale = scaler.scale_ if standardize else np.ones(x.shape[1])
    xs = (x - mean) / scale

    K = rbf_kernel(xs, xs, kernel_gamma)
    n = x.shape[0]
    lower = np.minimum(0.0, C * y)
    upper = np.maximum(0.0, C * y)
    beta = np.zeros(n)
    g = y.copy()

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        can_grow = beta < upper
        can_shrink = beta > lower
        i = int(np.argmax(np.where(can_grow, g, -np.inf)))
        j = int(np.argmin(np.where(can_shrink, g, np.inf)))
        gap = g[i] - g[j]
        if gap < tol:
            converged = True
            break
        curvature = max(K[i, i] + K[j, j] - 2.0 * K[i, j], TAU)
        room_i, room_j = upper[i] - beta[i], beta[j] - lower[j]
        lam = min(room_i, room_j, gap / curvature)
        g -= lam * (K[i] - K[j])
        beta[i] = upper[i] if lam == room_i else beta[i] + lam
        beta[j] = lower[j] if lam == room_j else beta[j] - lam

    if not converged:
        logger.warning(
            "SMO hit the iteration cap (%d) with KKT gap %.3e > tol %.1e; returning current solution",
            max_iter, gap, tol,
        )

    free = (beta > lower) & (beta < upper)
    if np.any(free):
        bias = float(np.mean(g[free]))
    else:
        bias = float((g[i] + g[j]) / 2.0)

    sv = np.abs(beta) > 0
    model = SvmModel(
        support_vectors=xs[sv],
        alphas=np.abs(beta[sv]),
        labels=y[sv],
        bias=bias,
        kernel_gamma=float(kernel_gamma),
        C=float(C),
        scaler_mean=np.asarray(mean, dtype=np.float64),
        scaler_scale=np.asarray(scale, dtype=np.float64),
        converged=converged,
        iterations=it,
    )
    logger.debug(
        "SMO: n=%d C=%g gamma=%g iterations=%d support_vectors=%d converged=%s",
        n, C, kernel_gamma, it, int(sv.sum()), converged,
    )
    return model


# ── Inference ──


def decision_function(model: SvmModel, features) -> np.ndarray:
    x = _check_features(features)
    if x.shape[1] != model.n_features:
        raise InvalidInputError(f"feature length {x.shape[1]} != trained dimension {model.n_features}")
    if model.support_vectors.shape[0] == 0:
        return np.full(x.shape[0], model.bias)
    K = rbf_kernel(model.standardize(x), model.support_vectors, model.kernel_gamma)
    return K @ model.dual_coef + model.bias


def svm_predict(model: SvmModel, features) -> tuple[np.ndarray, np.ndarray]:
    """Binary targets (1 = virtual background, 0 = real) and signed margins."""
    margins = decision_function(model, features)
    return (margins >= 0).astype(np.int64), margins


# ── Model selection ──


@dataclass
class GridSearchResult:
    C: float
    gamma: float
    cv_accuracy: float
    scores: dict[str, float] = field(default_factory=dict)  # "C,gamma" -> mean accuracy


def grid_search_cv(
    features,
    labels,
    C_grid,
    gamma_grid,
    folds: int = 5,
    seed: int = 0,
    tol: float | None = None,
) -> GridSearchResult:
    """Stratified k-fold search; ties go to the smaller C, then the smaller gamma."""
    x = _check_features(features)
    y = _as_signed_labels(labels)
    if folds < 2:
        raise InvalidInputError(f"folds must be >= 2, got {folds}")
    _, class_counts = np.unique(y, return_counts=True)
    if class_counts.shape[0] < 2 or class_counts.min() < folds:
        raise InvalidInputError(f"each class needs at least {folds} samples for {folds}-fold CV")
    if not C_grid or not gamma_grid:
        raise InvalidInputError("C and gamma grids must be non-empty")

    splits = list(StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed).split(x, y))
    best: GridSearchResult | None = None
    scores: dict[str, float] = {}
    for C, gamma in product(sorted(C_grid), sorted(gamma_grid)):
        accs = []
        for train_idx, val_idx in splits:
            model = svm_train(x[train_idx], y[train_idx], C, gamma, tol=tol)
            pred, _ = svm_predict(model, x[val_idx])
            accs.append(float(np.mean(pred == (y[val_idx] > 0))))
        score = float(np.mean(accs))
        scores[f"{C:g},{gamma:g}"] = score
        if best is None or score > best.cv_accuracy:
            best = GridSearchResult(C=float(C), gamma=float(gamma), cv_accuracy=score)
    best.scores = scores
    logger.info("Grid search: C=%g gamma=%g cv_accuracy=%.4f", best.C, best.gamma, best.cv_accuracy)
    return best


# ── Persistence ──


def _sv_path(path: Path) -> Path:
    return path.with_suffix(".sv")


def save_svm(model: SvmModel, path: str | Path) -> Path:
    """Write JSON metadata at ``path`` and the support vectors as float64 LE beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": FORMAT_VERSION,
        "C": model.C,
        "kernel_gamma": model.kernel_gamma,
        "bias": model.bias,
        "alphas": model.alphas.tolist(),
        "labels": model.labels.tolist(),
        "scaler_mean": model.scaler_mean.tolist(),
        "scaler_scale": model.scaler_scale.tolist(),
        "n_support": int(model.support_vectors.shape[0]),
        "n_features": model.n_features,
        "converged": model.converged,
        "iterations": model.iterations,
        "support_vectors_file": _sv_path(path).name,
        "meta": model.meta,
    }
    path.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")
    _sv_path(path).write_bytes(np.ascontiguousarray(model.support_vectors, dtype="<f8").tobytes())
    return path


def load_svm(path: str | Path) -> SvmModel:
    path = Path(path)
    if not path.exists() or not _sv_path(path).exists():
        raise MissingArtifactError(f"SVM model not found: {path}")
    meta = json.loads(path.read_text(encoding="utf-8"))
    if meta.get("format_version") != FORMAT_VERSION:
        raise FrameFormatError(f"{path}: unsupported SVM format {meta.get('format_version')}")
    n_sv, d = meta["n_support"], meta["n_features"]
    raw = np.frombuffer(_sv_path(path).read_bytes(), dtype="<f8")
    if raw.size != n_sv * d:
        raise FrameFormatError(f"{path}: support-vector block has {raw.size} values, expected {n_sv * d}")
    return SvmModel(
        support_vectors=raw.reshape(n_sv, d).astype(np.float64),
        alphas=np.asarray(meta["alphas"], dtype=np.float64),
        labels=np.asarray(meta["labels"], dtype=np.float64),
        bias=float(meta["bias"]),
        kernel_gamma=float(meta["kernel_gamma"]),
        C=float(meta["C"]),
        scaler_mean=np.asarray(meta["scaler_mean"], dtype=np.float64),
        scaler_scale=np.asarray(meta["scaler_scale"], dtype=np.float64),
        converged=bool(meta["converged"]),
        iterations=int(meta["iterations"]),
        meta=meta.get("meta", {}),
    )
