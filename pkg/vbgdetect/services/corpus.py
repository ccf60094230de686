"""Synthetic composited corpus, frame ingestion and JSON-lines manifests.

Real frames are procedural scenes with fine surface texture and per-pixel
sensor noise over the whole frame, rendered at native resolution. Virtual
frames paste the foreground region of a real frame over a different scene
rendered at reduced resolution, bilinearly upsampled and Gaussian-blurred,
with no sensor noise; its texture ends up coarse and faint. Attack frames
re-insert the paired real frame itself as the background, resampled at
native resolution by a sub-pixel shift and lightly blurred, so most of its
texture and part of its noise survive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from vbgdetect.errors import FrameFormatError, InvalidInputError, MissingArtifactError
from vbgdetect.imaging.codec import FRAME_SUFFIXES, load_frame, save_frame
from vbgdetect.imaging.frame import Frame, quantize
from vbgdetect.models.schemas import CorpusConfig, FrameLabel, ManifestEntry, Split, SplitCounts
from vbgdetect.services.batch import parallel_map
from vbgdetect.utils.hashing import content_hash

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"

# Child-stream keys under a frame seed.
_BACKGROUND, _MASK, _FOREGROUND = 1, 2, 3
_LABEL_ORDER = (FrameLabel.REAL, FrameLabel.VIRTUAL, FrameLabel.ATTACK_VIRTUAL)


def child_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


# ── Scene synthesis ──


def _value_noise(rng: np.random.Generator, width: int, height: int, octaves: int) -> np.ndarray:
    """Multi-octave value noise in [0, 1], ``(h, w, 3)`` float32."""
    out = np.zeros((height, width, 3), dtype=np.float32)
    amplitude, total = 1.0, 0.0
    for octave in range(octaves):
        cells = 4 * 2**octave
        grid_h = cells + 1
        grid_w = max(2, int(round(cells * width / height)) + 1)
        grid = rng.random((grid_h, grid_w, 3)).astype(np.float32)
        out += amplitude * cv2.resize(grid, (width, height), interpolation=cv2.INTER_LINEAR)
        total += amplitude
        amplitude *= 0.5
    return out / total


def _texture(cfg: CorpusConfig, rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Zero-mean luminance texture with std ``cfg.texture_sigma``, ``(h, w, 1)``."""
    if cfg.texture_sigma == 0:
        return np.zeros((height, width, 1))
    field = cv2.GaussianBlur(
        rng.standard_normal((height, width)).astype(np.float32),
        (0, 0),
        sigmaX=cfg.texture_scale_px,
        borderType=cv2.BORDER_REFLECT,
    ).astype(np.float64)
    field -= field.mean()
    field /= max(float(field.std()), 1e-12)
    return cfg.texture_sigma * field[:, :, None]


def _scene(cfg: CorpusConfig, rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Noise-free procedural scene as float64 intensities, rendered at ``width x height``."""
    noise = _value_noise(rng, width, height, cfg.octaves).astype(np.float64)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    ramp = np.cos(theta) * xx / width + np.sin(theta) * yy / height
    ramp = (ramp - ramp.min()) / max(np.ptp(ramp), 1e-12)
    tint = rng.uniform(0.6, 1.0, size=3)
    base = 255.0 * tint * (0.7 * noise + 0.3 * ramp[:, :, None])
    # Texture contrast does not depend on the tint.
    return base + _texture(cfg, rng, width, height)


def _with_sensor_noise(cfg: CorpusConfig, rng: np.random.Generator, scene: np.ndarray) -> np.ndarray:
    if cfg.sensor_noise_sigma > 0:
        scene = scene + rng.normal(0.0, cfg.sensor_noise_sigma, size=scene.shape)
    return quantize(scene)


def _background_size(cfg: CorpusConfig) -> tuple[int, int]:
    return (
        max(2, int(round(cfg.width * cfg.background_downscale))),
        max(2, int(round(cfg.height * cfg.background_downscale))),
    )


def _upsample_and_blur(cfg: CorpusConfig, small: np.ndarray) -> np.ndarray:
    """Bilinear upscale to frame size, then Gaussian blur; no sensor noise is added."""
    src = small.astype(np.float32)
    if src.shape[:2] != (cfg.height, cfg.width):
        src = cv2.resize(src, (cfg.width, cfg.height), interpolation=cv2.INTER_LINEAR)
    if cfg.background_blur_sigma > 0:
        src = cv2.GaussianBlur(
            src, (0, 0), sigmaX=cfg.background_blur_sigma, borderType=cv2.BORDER_REPLICATE
        )
    return src.astype(np.float64)


def _reinsert(cfg: CorpusConfig, image: np.ndarray) -> np.ndarray:
    """Native-resolution sub-pixel resample of a captured frame, then a light blur."""
    src = image.astype(np.float32)
    if cfg.attack_shift_px > 0:
        shift = np.float32([[1.0, 0.0, cfg.attack_shift_px], [0.0, 1.0, cfg.attack_shift_px]])
        src = cv2.warpAffine(
            src,
            shift,
            (cfg.width, cfg.height),
            flags=cv2.INTER_LINEAR,
            borderMode=cv2.BORDER_REPLICATE,
        )
    if cfg.attack_blur_sigma > 0:
        src = cv2.GaussianBlur(
            src, (0, 0), sigmaX=cfg.attack_blur_sigma, borderType=cv2.BORDER_REPLICATE
        )
    return src.astype(np.float64)


def foreground_mask(cfg: CorpusConfig, seed: int) -> np.ndarray:
    """Alpha matte in [0, 1] (1 = foreground) with ``cfg.feather_px`` feathering."""
    rng = np.random.default_rng(child_seed(seed, _MASK))
    w, h = cfg.width, cfg.height
    cx = w * rng.uniform(0.4, 0.6)
    cy = h * rng.uniform(0.55, 0.7)
    a = w * rng.uniform(0.15, 0.25)
    b = h * rng.uniform(0.3, 0.45)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    if cfg.mask_shape == "ellipse":
        # Approximate signed distance in pixels; negative inside.
        dist = (np.sqrt(((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2) - 1.0) * min(a, b)
    else:
        dist = np.maximum(np.abs(xx - cx) - a, np.abs(yy - cy) - b)
    if cfg.feather_px == 0:
        return (dist <= 0).astype(np.float64)
    return np.clip(0.5 - dist / cfg.feather_px, 0.0, 1.0)


def _composite(foreground: np.ndarray, background: np.ndarray, alpha: np.ndarray) -> Frame:
    a = alpha[:, :, None]
    return Frame(quantize(a * foreground + (1.0 - a) * background))


def _check_matte(cfg: CorpusConfig, matte: np.ndarray | None, seed: int) -> np.ndarray:
    if matte is None:
        return foreground_mask(cfg, seed)
    matte = np.asarray(matte, dtype=np.float64)
    if matte.shape != (cfg.height, cfg.width):
        raise InvalidInputError(f"matte shape {matte.shape} != frame {(cfg.height, cfg.width)}")
    if matte.max() > 1.0:
        matte = matte / 255.0
    return np.clip(matte, 0.0, 1.0)


def gen_real_frame(cfg: CorpusConfig, seed: int) -> Frame:
    rng = np.random.default_rng(seed)
    scene = _scene(cfg, rng, cfg.width, cfg.height)
    return Frame(_with_sensor_noise(cfg, rng, scene))


def gen_virtual_frame(cfg: CorpusConfig, seed: int, matte: np.ndarray | None = None) -> Frame:
    """Foreground of a real frame over a distinct, noise-free, smoothed background."""
    foreground = gen_real_frame(cfg, seed).pixels.astype(np.float64)
    rng = np.random.default_rng(child_seed(seed, _BACKGROUND))
    small_w, small_h = _background_size(cfg)
    background = _upsample_and_blur(cfg, _scene(cfg, rng, small_w, small_h))
    return _composite(foreground, background, _check_matte(cfg, matte, seed))


def gen_attack_frame(cfg: CorpusConfig, seed: int, matte: np.ndarray | None = None) -> Frame:
    """A new foreground over ``gen_real_frame(cfg, seed)`` re-inserted as a virtual background."""
    paired_real = gen_real_frame(cfg, seed).pixels
    background = _reinsert(cfg, paired_real)
    foreground = gen_real_frame(cfg, child_seed(seed, _FOREGROUND)).pixels.astype(np.float64)
    return _composite(foreground, background, _check_matte(cfg, matte, seed))


def lighting_proxy(frame: Frame, factor: float) -> Frame:
    """Global illumination scaling standing in for dimmed lamps."""
    if not 0.0 < factor <= 1.0:
        raise InvalidInputError(f"lighting factor must be in (0, 1], got {factor}")
    if factor == 1.0:
        return frame.copy()
    return Frame(quantize(factor * frame.pixels.astype(np.float64)))


_GENERATORS = {
    FrameLabel.REAL: gen_real_frame,
    FrameLabel.VIRTUAL: gen_virtual_frame,
    FrameLabel.ATTACK_VIRTUAL: gen_attack_frame,
}


# ── Configs ──


def reference_proportional(scale: float, **overrides) -> CorpusConfig:
    """Split counts scaled from 3000/500/300 per class; attack class from 600/200/150."""
    if scale <= 0:
        raise InvalidInputError(f"scale must be > 0, got {scale}")

    def scaled(train: int, val: int, test: int) -> SplitCounts:
        return SplitCounts(
            train=max(1, int(round(train * scale))),
            val=max(1, int(round(val * scale))),
            test=max(1, int(round(test * scale))),
        )

    return CorpusConfig(
        counts=scaled(3000, 500, 300),
        attack_counts=scaled(600, 200, 150),
        **overrides,
    )


# ── Manifests ──


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for entry in entries:
            f.write(entry.model_dump_json() + "\n")
    logger.info("Wrote %d manifest entries to %s", len(entries), path)
    return path


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"manifest not found: {path}")
    entries = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                entries.append(ManifestEntry.model_validate_json(line))
    return entries


def entry_path(entry: ManifestEntry, manifest_path: str | Path) -> Path:
    """Entries written by ``build_manifest`` are relative to the manifest's directory."""
    p = Path(entry.path)
    return p if p.is_absolute() else Path(manifest_path).parent / p


@dataclass(frozen=True)
class _FrameJob:
    label: FrameLabel
    split: Split
    index: int
    seed: int


def _plan(cfg: CorpusConfig) -> list[_FrameJob]:
    """Per-class seeded shuffle of frame indices into train/val/test."""
    jobs: list[_FrameJob] = []
    for label_idx, label in enumerate(_LABEL_ORDER):
        counts = cfg.attack_counts if label is FrameLabel.ATTACK_VIRTUAL else cfg.counts
        n = counts.total
        if n == 0:
            continue
        order = np.random.default_rng(child_seed(cfg.seed, label_idx)).permutation(n)
        bounds = [(Split.TRAIN, counts.train), (Split.VAL, counts.val), (Split.TEST, counts.test)]
        position = 0
        for split, count in bounds:
            for index in sorted(int(i) for i in order[position : position + count]):
                jobs.append(_FrameJob(label, split, index, child_seed(cfg.seed, label_idx, index)))
            position += count
    return jobs


def build_manifest(cfg: CorpusConfig, out_dir: str | Path) -> Path:
    """Materialize every frame as PNG and write ``manifest.jsonl``; a pure function of ``cfg``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tags = [] if cfg.brightness == 1.0 else [f"lighting_{cfg.brightness:g}"]

    def materialize(job: _FrameJob) -> ManifestEntry:
        frame = _GENERATORS[job.label](cfg, job.seed)
        if cfg.brightness != 1.0:
            frame = lighting_proxy(frame, cfg.brightness)
        rel = Path("frames") / job.label.value / job.split.value / f"{job.label.value}_{job.index:05d}.png"
        save_frame(frame, out_dir / rel)
        return ManifestEntry(
            path=rel.as_posix(),
            label=job.label,
            split=job.split,
            source_tag=cfg.source_tag,
            scenario_tags=list(tags),
            content_hash=content_hash(frame),
            seed=job.seed,
        )

    jobs = _plan(cfg)
    entries = parallel_map(materialize, jobs, desc="corpus")
    path = write_manifest(entries, out_dir / MANIFEST_NAME)
    (out_dir / "corpus_config.json").write_text(cfg.model_dump_json(indent=2), encoding="utf-8")

    summary = {label.value: sum(e.label is label for e in entries) for label in _LABEL_ORDER}
    summary["total"] = len(entries)
    logger.info("Corpus complete: %s", summary)
    return path


# ── Ingestion ──


def ingest(
    directory: str | Path,
    label: FrameLabel | str,
    source_tag: str,
    split: Split | str = Split.TEST,
    scenario_tags: list[str] | None = None,
    existing: list[ManifestEntry] | None = None,
    skip_invalid: bool = False,
) -> list[ManifestEntry]:
    """Manifest entries for every PNG/JPEG under ``directory`` (sorted, recursive).

    Frames whose content hash already appears (in this directory or in
    ``existing``) are still added but logged as duplicates. Undecodable files
    raise unless ``skip_invalid`` is set, in which case they are logged and
    counted.
    """
    directory = Path(directory)
    label, split = FrameLabel(label), Split(split)
    if not directory.is_dir():
        raise InvalidInputError(f"not a directory: {directory}")
    files = sorted(p for p in directory.rglob("*") if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise InvalidInputError(f"no PNG/JPEG frames in {directory}")

    seen = {e.content_hash: e.path for e in existing or []}
    entries: list[ManifestEntry] = []
    duplicates = 0
    errors = 0
    for path in files:
        try:
            frame = load_frame(path)
        except FrameFormatError:
            if not skip_invalid:
                raise
            logger.exception("Failed to decode %s, skipping", path)
            errors += 1
            continue
        digest = content_hash(frame)
        if digest in seen:
            logger.warning("Duplicate frame %s (same content as %s)", path, seen[digest])
            duplicates += 1
        else:
            seen[digest] = str(path)
        entries.append(
            ManifestEntry(
                path=str(path.resolve()),
                label=label,
                split=split,
                source_tag=source_tag,
                scenario_tags=list(scenario_tags or []),
                content_hash=digest,
            )
        )

    summary = {
        "frames_ingested": len(entries),
        "duplicates": duplicates,
        "errors": errors,
        "total_files": len(files),
    }
    logger.info("Ingestion complete: %s", summary)
    return entries
