"""Toolkit settings loaded from environment variables.

Numeric tunables for filters, codecs and solvers live here.
Experiment grids (attack chains, lighting factors, SVM sweeps) live in
``vbgdetect/grids.py``.
"""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Logging / execution
    LOG_LEVEL: str = "INFO"
    WORKERS: int = 4
    WORK_DIR: str = "runs"

    # Codec
    JPEG_SUBSAMPLING: int = 0  # Pillow code: 0 = 4:4:4, 2 = 4:2:0
    PNG_COMPRESS_LEVEL: int = 6

    # Attacks
    MIN_FRAME_SIDE: int = 16
    CLAHE_TILE_GRID: int = 8
    SHARPEN_AMOUNT: float = 1.0
    SHARPEN_SIGMA: float = 1.0
    ROTATE_CROP: bool = False

    # Features
    COMAT_BINS: int = 64

    # SVM
    SVM_TOL: float = 1e-3
    SVM_MAX_ITER: int = 100_000

    # Gradient check
    GRADCHECK_EPSILON: float = 1e-3
    GRADCHECK_TOLERANCE: float = 1e-4

    model_config = {"env_file": ".env", "extra": "ignore"}


settings = Settings()
