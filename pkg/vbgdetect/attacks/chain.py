"""Attack dispatch, chains and the compact ``op:param[@seed]+op...`` string form."""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from vbgdetect.attacks import filters, geometric
from vbgdetect.errors import InvalidInputError
from vbgdetect.imaging.codec import encode_jpeg
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import PRIMARY_PARAM, AttackChain, AttackOp, AttackSpec

logger = logging.getLogger(__name__)

_ALIASES = {
    "blur": AttackOp.AVG_BLUR,
    "noise": AttackOp.GAUSS_NOISE,
    "rotation": AttackOp.ROTATE,
}

_DISPATCH: dict[AttackOp, Callable[[Frame, AttackSpec, int], Frame]] = {
    AttackOp.MEDIAN: lambda f, s, _: filters.median_filter(f, int(s.params["k"])),
    AttackOp.AVG_BLUR: lambda f, s, _: filters.average_blur(f, int(s.params["k"])),
    AttackOp.GAMMA: lambda f, s, _: filters.gamma_correct(f, s.params["gamma"]),
    AttackOp.CLAHE: lambda f, s, _: filters.clahe(f, s.params["clip_limit"]),
    AttackOp.GAUSS_NOISE: lambda f, s, seed: filters.gaussian_noise(f, s.params["sigma"], seed),
    AttackOp.RESIZE: lambda f, s, _: geometric.resize(f, s.params["scale"]),
    AttackOp.ZOOM: lambda f, s, _: geometric.zoom(f, s.params["factor"]),
    AttackOp.ROTATE: lambda f, s, _: geometric.rotate(f, s.params["degrees"]),
    AttackOp.SHARPEN: lambda f, s, _: filters.sharpen(f),
    AttackOp.JPEG: lambda f, s, _: encode_jpeg(f, int(s.params["quality"])),
}


def frame_seed(seed: int, frame_key: int) -> int:
    """Per-frame noise seed; ``frame_key == 0`` leaves the spec seed unchanged."""
    if frame_key == 0:
        return seed
    return int(np.random.SeedSequence([seed, frame_key]).generate_state(1, dtype=np.uint64)[0])


def apply_attack(frame: Frame, spec: AttackSpec, frame_key: int = 0) -> Frame:
    return _DISPATCH[spec.op](frame, spec, frame_seed(spec.seed, frame_key))


def apply_chain(frame: Frame, chain: AttackChain, frame_key: int = 0) -> Frame:
    """Apply every step left to right.

    ``frame_key`` (e.g. a content hash) decorrelates noise across frames
    while keeping each frame's result independent of processing order.
    """
    out = frame
    for spec in chain.steps:
        out = apply_attack(out, spec, frame_key)
    return out


# ── Compact string form ──


def parse_attack(text: str) -> AttackSpec:
    """Parse ``op``, ``op:value`` or ``op:value@seed``."""
    text = text.strip()
    seed = 0
    if "@" in text:
        text, seed_text = text.rsplit("@", 1)
        try:
            seed = int(seed_text)
        except ValueError as exc:
            raise InvalidInputError(f"bad seed in attack '{text}@{seed_text}'") from exc
    name, _, value = text.partition(":")
    name = name.strip().lower()
    try:
        op = _ALIASES.get(name) or AttackOp(name)
    except ValueError as exc:
        raise InvalidInputError(f"unknown attack '{name}'") from exc

    params: dict[str, float] = {}
    param_name = PRIMARY_PARAM[op]
    if param_name is not None:
        if not value:
            raise InvalidInputError(f"attack '{name}' needs a parameter, e.g. {name}:3")
        try:
            params[param_name] = float(value)
        except ValueError as exc:
            raise InvalidInputError(f"bad parameter '{value}' for attack '{name}'") from exc
    elif value:
        raise InvalidInputError(f"attack '{name}' takes no parameter")
    try:
        return AttackSpec(op=op, params=params, seed=seed)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from exc


def parse_chain(text: str) -> AttackChain:
    """Parse ``median:3+jpeg:80`` into an AttackChain."""
    parts = [p for p in text.split("+") if p.strip()]
    if not parts:
        raise InvalidInputError("attack chain must not be empty")
    return AttackChain(steps=[parse_attack(p) for p in parts])
