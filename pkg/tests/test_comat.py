"""Tests for the six-band co-occurrence tensor."""

from __future__ import annotations

import numpy as np
import pytest

from vbgdetect.errors import InvalidInputError
from vbgdetect.features.comat import (
    PLANE_NAMES,
    CoMatTensor,
    PlaneKind,
    build_tensor,
    crossband_comat,
    normalize_tensor,
    prepare_cnn_input,
    rebin_tensor,
    render_planes,
    spatial_comat,
)
from vbgdetect.imaging.frame import ChannelPlane, Frame, split_channels


def _brute_force_spatial(samples: np.ndarray) -> np.ndarray:
    h, w = samples.shape
    out = np.zeros((256, 256), dtype=np.int64)
    for y in range(h - 1):
        for x in range(w - 1):
            out[samples[y, x], samples[y + 1, x + 1]] += 1
    return out


# ------------------------------------------------------------------
# Counting
# ------------------------------------------------------------------


def test_spatial_plane_matches_direct_count(make_frame):
    frame = make_frame(9, 11, seed=3)
    for plane in split_channels(frame):
        got = spatial_comat(plane).bins
        np.testing.assert_array_equal(got, _brute_force_spatial(plane.samples))


def test_two_by_two_oracle():
    # R plane [[1, 2], [3, 4]]: the only diagonal pair is (1, 4).
    px = np.zeros((2, 2, 3), dtype=np.uint8)
    px[:, :, 0] = [[1, 2], [3, 4]]
    px[:, :, 1] = [[5, 5], [5, 5]]
    t = build_tensor(Frame(px), normalize=False)
    r = t.plane("R").bins
    assert r[1, 4] == 1 and r.sum() == 1
    rg = t.plane("RG").bins
    assert rg[1, 5] == rg[2, 5] == rg[3, 5] == rg[4, 5] == 1
    assert t.plane("RG").kind is PlaneKind.CROSSBAND


def test_raw_plane_totals(make_frame):
    frame = make_frame(13, 17, seed=5)
    t = build_tensor(frame, normalize=False)
    assert t.planes.shape == (6, 256, 256)
    totals = t.planes.sum(axis=(1, 2))
    assert totals[:3].tolist() == [(17 - 1) * (13 - 1)] * 3
    assert totals[3:].tolist() == [17 * 13] * 3


def test_crossband_rejects_size_mismatch():
    a = ChannelPlane(np.zeros((4, 4), dtype=np.uint8))
    b = ChannelPlane(np.zeros((5, 4), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        crossband_comat(a, b)


def test_displacement_larger_than_plane_rejected():
    plane = ChannelPlane(np.zeros((1, 1), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        spatial_comat(plane)
    with pytest.raises(InvalidInputError):
        spatial_comat(ChannelPlane(np.zeros((4, 4), dtype=np.uint8)), (-1, 0))


# ------------------------------------------------------------------
# Normalization and rebinning
# ------------------------------------------------------------------


def test_normalized_planes_sum_to_one(noisy_frame):
    t = build_tensor(noisy_frame)
    assert t.normalized
    np.testing.assert_allclose(t.planes.sum(axis=(1, 2)), np.ones(6), atol=1e-12)


def test_normalize_leaves_empty_planes_zero():
    planes = np.zeros((6, 4, 4))
    planes[3:, 0, 0] = 5.0
    t = normalize_tensor(CoMatTensor(planes, False, 4, 4))
    assert np.all(t.planes[:3] == 0)
    np.testing.assert_allclose(t.planes[3:].sum(axis=(1, 2)), np.ones(3))


def test_crossband_planes_ignore_row_order(make_frame):
    frame = make_frame(24, 20, seed=4)
    swapped = Frame(frame.pixels[[5, 3, 4, 0, 1, 2] + list(range(6, 24))])
    raw = build_tensor(frame, normalize=False).planes
    raw_swapped = build_tensor(swapped, normalize=False).planes
    np.testing.assert_array_equal(raw[3:], raw_swapped[3:])
    # diagonal neighbours change with the row order
    assert not np.array_equal(raw[:3], raw_swapped[:3])


def test_normalization_keeps_each_plane_argmax(noisy_frame):
    raw = build_tensor(noisy_frame, normalize=False)
    norm = normalize_tensor(raw)
    for before, after in zip(raw.planes, norm.planes):
        assert np.argmax(before) == np.argmax(after)


def test_one_row_frame_has_no_diagonal_pairs():
    with pytest.raises(InvalidInputError):
        build_tensor(Frame(np.zeros((1, 3, 3), dtype=np.uint8)))


def test_rebin_preserves_mass_and_block_sums(noisy_frame):
    raw = build_tensor(noisy_frame, normalize=False)
    coarse = rebin_tensor(raw, 64)
    assert coarse.bin_count == 64
    np.testing.assert_array_equal(coarse.planes.sum(axis=(1, 2)), raw.planes.sum(axis=(1, 2)))
    assert coarse.planes[0, 0, 0] == raw.planes[0, :4, :4].sum()


def test_rebin_rejects_non_divisor(noisy_frame):
    raw = build_tensor(noisy_frame, normalize=False)
    with pytest.raises(InvalidInputError):
        rebin_tensor(raw, 100)


def test_prepare_cnn_input_normalizes_after_rebinning(noisy_frame):
    t = prepare_cnn_input(noisy_frame, 32)
    assert t.planes.shape == (6, 32, 32)
    np.testing.assert_allclose(t.planes.sum(axis=(1, 2)), np.ones(6), atol=1e-12)
    expected = normalize_tensor(rebin_tensor(build_tensor(noisy_frame, normalize=False), 32))
    np.testing.assert_array_equal(t.planes, expected.planes)


def test_as_hwc_layout(noisy_frame):
    t = prepare_cnn_input(noisy_frame, 16)
    hwc = t.as_hwc()
    assert hwc.shape == (16, 16, 6)
    np.testing.assert_array_equal(hwc[:, :, 4], t.planes[4])


def test_render_planes_writes_one_png_per_plane(tmp_path, noisy_frame):
    paths = render_planes(prepare_cnn_input(noisy_frame, 16), tmp_path, stem="x")
    assert [p.name for p in paths] == [f"x_{n}.png" for n in PLANE_NAMES]
    assert all(p.is_file() for p in paths)


def test_tensor_container_keeps_values_and_provenance(tmp_path, noisy_frame):
    from vbgdetect.features.container import read_tensor, write_tensor
    from vbgdetect.models.schemas import TensorProvenance

    t = prepare_cnn_input(noisy_frame, 16)
    prov = TensorProvenance(
        kind="comat", source_path="x.png", bin_count=16, width=t.width, height=t.height
    )
    path = write_tensor(t, tmp_path / "x.cmt", prov)
    back, back_prov = read_tensor(path)
    np.testing.assert_allclose(back.planes, t.planes, rtol=1e-6)
    assert back_prov == prov


def test_crspam_container_round_trip(tmp_path, noisy_frame):
    from vbgdetect.features.container import read_crspam, write_crspam
    from vbgdetect.features.crspam import crspam1372
    from vbgdetect.models.schemas import TensorProvenance

    v = crspam1372(noisy_frame)
    prov = TensorProvenance(kind="crspam", source_path="x.png", width=32, height=32)
    path = write_crspam(v, tmp_path / "x.crsp", prov)
    back = read_crspam(path)
    np.testing.assert_allclose(back.values, v.values, rtol=1e-6)
    np.testing.assert_allclose(back.cross, v.cross, rtol=1e-6)


def _brute_force_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((256, 256), dtype=np.int64)
    for y in range(a.shape[0]):
        for x in range(a.shape[1]):
            out[a[y, x], b[y, x]] += 1
    return out


def test_all_planes_match_oracles_on_random_small_frames():
    gen = np.random.default_rng(99)
    for _ in range(200):
        h, w = gen.integers(2, 17, size=2)
        frame = Frame(gen.integers(0, 256, size=(h, w, 3), dtype=np.uint8))
        raw = build_tensor(frame, normalize=False).planes
        px = frame.pixels
        for c in range(3):
            np.testing.assert_array_equal(raw[c], _brute_force_spatial(px[:, :, c]))
        for plane, (i, j) in zip(raw[3:], ((0, 1), (0, 2), (1, 2))):
            np.testing.assert_array_equal(plane, _brute_force_cross(px[:, :, i], px[:, :, j]))
