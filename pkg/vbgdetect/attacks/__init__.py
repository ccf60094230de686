"""Post-processing / laundering attacks."""

from vbgdetect.attacks.chain import apply_attack, apply_chain, parse_attack, parse_chain
from vbgdetect.attacks.filters import (
    average_blur,
    clahe,
    gamma_correct,
    gaussian_noise,
    median_filter,
    sharpen,
)
from vbgdetect.attacks.geometric import resize, rotate, zoom

__all__ = [
    "apply_attack",
    "apply_chain",
    "average_blur",
    "clahe",
    "gamma_correct",
    "gaussian_noise",
    "median_filter",
    "parse_attack",
    "parse_chain",
    "resize",
    "rotate",
    "sharpen",
    "zoom",
]
