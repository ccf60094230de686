"""Experiment grids for the scenario harness.

All experiment-specific constants (which attacks, which parameters, which
hyperparameter sweeps) live here so the harness code stays generic.

Values can be overridden via environment variables prefixed with ``GRID_``
(e.g. ``GRID_LIGHTING_FACTORS='[0.9, 0.6]'``).
"""

from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class ExperimentGrid(BaseSettings):
    """Every attack and sweep the scenarios iterate over."""

    # ── Robustness grid (compact chain strings, see attacks.chain) ──
    robustness_chains: list[str] = [
        "median:3",
        "median:5",
        "median:7",
        "gamma:0.9",
        "gamma:0.6",
        "gamma:1.3",
        "avg_blur:3",
        "avg_blur:5",
        "avg_blur:7",
        "clahe:2",
        "clahe:4",
        "gauss_noise:2@1",
        "gauss_noise:0.8@1",
        "resize:0.8",
        "resize:0.5",
        "zoom:1.4",
        "zoom:1.9",
        "rotate:5",
        "rotate:10",
        "avg_blur:3+sharpen",
    ]

    # ── Lighting proxy ──
    lighting_factors: list[float] = [1.0, 0.75, 0.5]

    # ── Median filter before JPEG ──
    prejpeg_median_kernel: int = 3
    prejpeg_qualities: list[int] = [95, 90, 85, 80]
    prejpeg_control_quality: int = 100

    # ── SVM sweeps: C in 2^-3..2^7, gamma in 2^-9..2^1 ──
    svm_c_grid: list[float] = [2.0**e for e in range(-3, 8)]
    svm_gamma_grid: list[float] = [2.0**e for e in range(-9, 2)]
    svm_folds: int = 5

    model_config = SettingsConfigDict(env_prefix="GRID_", extra="ignore")


experiment_grid = ExperimentGrid()
