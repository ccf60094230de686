"""Tests for corpus synthesis, manifests and frame ingestion."""

from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from vbgdetect.errors import FrameFormatError, InvalidInputError, MissingArtifactError
from vbgdetect.imaging.codec import load_frame, save_frame
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import CorpusConfig, FrameLabel, Split
from vbgdetect.services.corpus import (
    MANIFEST_NAME,
    _plan,
    build_manifest,
    entry_path,
    foreground_mask,
    gen_attack_frame,
    gen_real_frame,
    gen_virtual_frame,
    ingest,
    lighting_proxy,
    load_manifest,
    reference_proportional,
    write_manifest,
)
from vbgdetect.utils.hashing import content_hash


@pytest.fixture
def scene_config():
    return CorpusConfig(seed=4, width=96, height=96, feather_px=0.0)


def _background(mask: np.ndarray) -> np.ndarray:
    return mask == 0


def _diff_std(frame: Frame, region: np.ndarray) -> float:
    px = frame.pixels.astype(np.float64)
    dx = px[:, 1:] - px[:, :-1]
    keep = region[:, 1:] & region[:, :-1]
    return float(dx[keep].std())


# ------------------------------------------------------------------
# Generators
# ------------------------------------------------------------------


def test_generators_are_pure_functions_of_seed(scene_config):
    for gen in (gen_real_frame, gen_virtual_frame, gen_attack_frame):
        assert gen(scene_config, 10).same_as(gen(scene_config, 10))
        assert not gen(scene_config, 10).same_as(gen(scene_config, 11))


def test_mask_range_and_feathering(scene_config):
    hard = foreground_mask(scene_config, 3)
    assert set(np.unique(hard)) == {0.0, 1.0}
    soft = foreground_mask(scene_config.model_copy(update={"feather_px": 4.0}), 3)
    assert soft.min() == 0.0 and soft.max() == 1.0
    assert np.any((soft > 0) & (soft < 1))


def test_rectangle_mask(scene_config):
    mask = foreground_mask(scene_config.model_copy(update={"mask_shape": "rectangle"}), 3)
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    box = mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    assert np.all(box == 1.0)


def test_virtual_foreground_is_the_real_frame(scene_config):
    seed = 21
    mask = foreground_mask(scene_config, seed)
    real = gen_real_frame(scene_config, seed).pixels
    virtual = gen_virtual_frame(scene_config, seed).pixels
    inside = mask == 1
    np.testing.assert_array_equal(virtual[inside], real[inside])
    assert not np.array_equal(virtual[~inside], real[~inside])


def test_virtual_background_lacks_sensor_noise(scene_config):
    seed = 5
    region = _background(foreground_mask(scene_config, seed))
    real = gen_real_frame(scene_config, seed)
    virtual = gen_virtual_frame(scene_config, seed)
    assert _diff_std(virtual, region) < _diff_std(real, region)


def test_attack_background_tracks_paired_real_frame(scene_config):
    seed = 8
    region = _background(foreground_mask(scene_config, seed))
    real = gen_real_frame(scene_config, seed).pixels[region].astype(np.float64).ravel()
    attack = gen_attack_frame(scene_config, seed).pixels[region].astype(np.float64).ravel()
    ncc = np.corrcoef(real, attack)[0, 1]
    assert ncc > 0.9


def test_attack_background_keeps_most_of_the_texture(scene_config):
    seed = 8
    region = _background(foreground_mask(scene_config, seed))
    real = _diff_std(gen_real_frame(scene_config, seed), region)
    virtual = _diff_std(gen_virtual_frame(scene_config, seed), region)
    attack = _diff_std(gen_attack_frame(scene_config, seed), region)
    assert virtual < attack < real


def test_texture_outlasts_a_median_filter(scene_config):
    from vbgdetect.attacks.filters import median_filter

    seed = 5
    region = _background(foreground_mask(scene_config, seed))
    real = median_filter(gen_real_frame(scene_config, seed), 3)
    virtual = median_filter(gen_virtual_frame(scene_config, seed), 3)
    assert _diff_std(real, region) > 2.0 * _diff_std(virtual, region)


def test_texture_can_be_switched_off(scene_config):
    flat = scene_config.model_copy(update={"texture_sigma": 0.0, "sensor_noise_sigma": 0.0})
    seed = 5
    region = _background(foreground_mask(flat, seed))
    assert _diff_std(gen_real_frame(flat, seed), region) < _diff_std(gen_real_frame(scene_config, seed), region)


def test_explicit_matte_overrides_generated_mask(scene_config):
    matte = np.zeros((96, 96), dtype=np.uint8)
    real = gen_real_frame(scene_config, 2)
    virtual = gen_virtual_frame(scene_config, 2, matte=matte)
    assert not np.array_equal(virtual.pixels, real.pixels)
    full = gen_virtual_frame(scene_config, 2, matte=np.full((96, 96), 255, dtype=np.uint8))
    assert full.same_as(real)
    with pytest.raises(InvalidInputError):
        gen_virtual_frame(scene_config, 2, matte=np.zeros((4, 4)))


def test_lighting_proxy_scales_intensities(noisy_frame):
    assert lighting_proxy(noisy_frame, 1.0).same_as(noisy_frame)
    dim = lighting_proxy(noisy_frame, 0.5).pixels.astype(int)
    expected = np.floor(noisy_frame.pixels.astype(np.float64) * 0.5 + 0.5).astype(int)
    np.testing.assert_array_equal(dim, expected)
    for bad in (0.0, 1.5):
        with pytest.raises(InvalidInputError):
            lighting_proxy(noisy_frame, bad)


# ------------------------------------------------------------------
# Configs and plans
# ------------------------------------------------------------------


def test_default_plan_size():
    # 300/50/30 frames for each of the two clean classes.
    assert len(_plan(CorpusConfig())) == 760


def test_proportional_counts():
    cfg = reference_proportional(0.1, width=64, height=64)
    assert (cfg.counts.train, cfg.counts.val, cfg.counts.test) == (300, 50, 30)
    assert (cfg.attack_counts.train, cfg.attack_counts.val, cfg.attack_counts.test) == (60, 20, 15)
    assert cfg.width == 64
    with pytest.raises(InvalidInputError):
        reference_proportional(0)


def test_plan_splits_are_disjoint(tiny_corpus_config):
    jobs = _plan(tiny_corpus_config)
    seen = {(j.label, j.index) for j in jobs}
    assert len(seen) == len(jobs)
    for label in (FrameLabel.REAL, FrameLabel.VIRTUAL):
        assert sum(j.label is label and j.split is Split.TRAIN for j in jobs) == 8


# ------------------------------------------------------------------
# Manifests
# ------------------------------------------------------------------


def test_build_manifest_writes_frames_and_entries(tmp_path, tiny_corpus_config):
    path = build_manifest(tiny_corpus_config, tmp_path)
    assert path == tmp_path / MANIFEST_NAME
    entries = load_manifest(path)
    assert len(entries) == 14 + 14 + 8
    assert sum(e.label is FrameLabel.ATTACK_VIRTUAL for e in entries) == 8

    first = entries[0]
    assert not first.path.startswith("/")
    frame = load_frame(entry_path(first, path))
    assert content_hash(frame) == first.content_hash
    assert (frame.width, frame.height) == (48, 48)
    saved = json.loads((tmp_path / "corpus_config.json").read_text())
    assert saved["seed"] == tiny_corpus_config.seed


def test_build_manifest_is_reproducible(tmp_path, tiny_corpus_config):
    a = load_manifest(build_manifest(tiny_corpus_config, tmp_path / "a"))
    b = load_manifest(build_manifest(tiny_corpus_config, tmp_path / "b"))
    assert [e.content_hash for e in a] == [e.content_hash for e in b]
    assert [e.path for e in a] == [e.path for e in b]


def test_brightness_is_tagged(tmp_path, tiny_corpus_config):
    cfg = tiny_corpus_config.model_copy(update={"brightness": 0.5})
    entries = load_manifest(build_manifest(cfg, tmp_path))
    assert all(e.scenario_tags == ["lighting_0.5"] for e in entries)


def test_load_manifest_missing(tmp_path):
    with pytest.raises(MissingArtifactError):
        load_manifest(tmp_path / "absent.jsonl")


# ------------------------------------------------------------------
# Ingestion
# ------------------------------------------------------------------


def test_ingest_sorted_absolute_and_flags_duplicates(tmp_path, make_frame, caplog):
    a, b = make_frame(20, 20, seed=1), make_frame(20, 20, seed=2)
    save_frame(a, tmp_path / "in" / "b.png")
    save_frame(b, tmp_path / "in" / "a.png")
    save_frame(a, tmp_path / "in" / "sub" / "c.png")
    (tmp_path / "in" / "notes.txt").write_text("ignored")

    with caplog.at_level(logging.WARNING, logger="vbgdetect.services.corpus"):
        entries = ingest(tmp_path / "in", "real", "webcam_a", scenario_tags=["mismatch"])

    assert [e.path.rsplit("/", 1)[-1] for e in entries] == ["a.png", "b.png", "c.png"]
    assert all(e.path.startswith("/") for e in entries)
    assert all(e.split is Split.TEST and e.source_tag == "webcam_a" for e in entries)
    assert entries[1].content_hash == entries[2].content_hash
    assert "Duplicate frame" in caplog.text

    path = write_manifest(entries, tmp_path / "m.jsonl")
    assert load_manifest(path) == entries


def test_ingest_rejects_empty_and_bad_files(tmp_path, make_frame):
    (tmp_path / "empty").mkdir()
    with pytest.raises(InvalidInputError):
        ingest(tmp_path / "empty", "real", "x")

    save_frame(make_frame(20, 20), tmp_path / "mixed" / "good.png")
    (tmp_path / "mixed" / "broken.png").write_bytes(b"garbage")
    with pytest.raises(FrameFormatError):
        ingest(tmp_path / "mixed", "virtual", "x")
    entries = ingest(tmp_path / "mixed", "virtual", "x", skip_invalid=True)
    assert len(entries) == 1 and entries[0].label is FrameLabel.VIRTUAL
