"""Finite-difference verification of the backward pass on a reduced network."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from convnet.config import Architecture
from convnet.network import CnnModel, bce_loss

logger = logging.getLogger(__name__)

REL_ERROR_FLOOR = 1e-8


@dataclass
class GradCheckReport:
    passed: bool
    max_rel_error: float
    tolerance: float
    epsilon: float
    checked: int
    kinks: int  # perturbations that changed a ReLU mask or pool argmax; not compared
    worst: str = ""
    per_parameter: dict[str, float] = field(default_factory=dict)


def _same_pattern(a: list[np.ndarray], b: list[np.ndarray]) -> bool:
    return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def grad_check(
    arch: Architecture | None = None,
    epsilon: float = 1e-3,
    tolerance: float = 1e-4,
    seed: int = 0,
    batch: int = 2,
) -> GradCheckReport:
    """Compare analytic and central-difference gradients of every parameter.

    Runs in float64 with dropout masks frozen after the first train pass, so
    both sides see the same sub-network.
    """
    arch = arch or Architecture.reduced()
    model = CnnModel(arch, seed=seed, dtype=np.float64)
    rng = np.random.default_rng(seed)
    x = rng.random((batch, arch.in_channels, arch.input_bins, arch.input_bins))
    x /= x.sum(axis=(2, 3), keepdims=True)
    y = (np.arange(batch) % 2).astype(np.float64)

    model.freeze_dropout(True)
    model.forward(x, "train", rng)
    base_pattern = model.activation_pattern()
    analytic = [g.copy() for g in model.backward(x, y)]

    def loss() -> float:
        return bce_loss(model.forward(x, "train", rng), y)

    max_err, worst, checked, kinks = 0.0, "", 0, 0
    per_parameter: dict[str, float] = {}
    for (name, param), grad in zip(model.parameters(), analytic):
        param_max = 0.0
        for idx in np.ndindex(param.shape):
            orig = param[idx]
            param[idx] = orig + epsilon
            loss_plus = loss()
            pattern_plus = model.activation_pattern()
            param[idx] = orig - epsilon
            loss_minus = loss()
            pattern_minus = model.activation_pattern()
            param[idx] = orig
            if not (_same_pattern(pattern_plus, base_pattern) and _same_pattern(pattern_minus, base_pattern)):
                kinks += 1
                continue
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            a = float(grad[idx])
            err = abs(a - numeric) / max(abs(a) + abs(numeric), REL_ERROR_FLOOR)
            checked += 1
            param_max = max(param_max, err)
            if err > max_err:
                max_err, worst = err, f"{name}{list(idx)}"
        per_parameter[name] = param_max
    model.freeze_dropout(False)

    report = GradCheckReport(
        passed=checked > 0 and max_err <= tolerance,
        max_rel_error=max_err,
        tolerance=tolerance,
        epsilon=epsilon,
        checked=checked,
        kinks=kinks,
        worst=worst,
        per_parameter=per_parameter,
    )
    logger.info(
        "Gradient check %s: max_rel_error=%.3e (tolerance %.1e) checked=%d kinks=%d worst=%s",
        "passed" if report.passed else "FAILED",
        max_err, tolerance, checked, kinks, worst,
    )
    return report
