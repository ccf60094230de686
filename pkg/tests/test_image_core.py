"""Tests for frames, planes, luma, codecs and content hashing."""

from __future__ import annotations

import numpy as np
import pytest

from vbgdetect.errors import FrameFormatError, InvalidInputError
from vbgdetect.imaging.codec import encode_jpeg, load_frame, save_frame
from vbgdetect.imaging.frame import (
    ChannelPlane,
    Frame,
    quantize,
    recompose,
    split_channels,
    to_luma,
)
from vbgdetect.utils.hashing import content_hash, hash_key


# ------------------------------------------------------------------
# Quantization
# ------------------------------------------------------------------


def test_quantize_rounds_half_away_from_zero():
    out = quantize(np.array([0.5, 1.5, 2.5, 127.49, 254.5]))
    assert out.tolist() == [1, 2, 3, 127, 255]


def test_quantize_clamps_to_byte_range():
    out = quantize(np.array([-40.0, -0.5, 255.4, 1e6]))
    assert out.dtype == np.uint8
    assert out.tolist() == [0, 0, 255, 255]


# ------------------------------------------------------------------
# Frame and plane validation
# ------------------------------------------------------------------


def test_frame_rejects_wrong_shape_and_dtype():
    with pytest.raises(InvalidInputError):
        Frame(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        Frame(np.zeros((4, 4, 4), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        Frame(np.zeros((4, 4, 3), dtype=np.float32))


def test_frame_samples_are_interleaved_rgb():
    px = np.zeros((1, 2, 3), dtype=np.uint8)
    px[0, 0] = (1, 2, 3)
    px[0, 1] = (4, 5, 6)
    assert Frame(px).samples.tolist() == [1, 2, 3, 4, 5, 6]


def test_split_then_recompose_is_identity(noisy_frame):
    r, g, b = split_channels(noisy_frame)
    assert r.width == noisy_frame.width and r.height == noisy_frame.height
    assert recompose(r, g, b).same_as(noisy_frame)


def test_recompose_rejects_mismatched_planes():
    a = ChannelPlane(np.zeros((4, 4), dtype=np.uint8))
    b = ChannelPlane(np.zeros((4, 5), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        recompose(a, a, b)


def test_luma_of_grey_is_grey_and_primaries_follow_weights():
    grey = Frame(np.full((2, 2, 3), 77, dtype=np.uint8))
    assert np.all(to_luma(grey).samples == 77)

    red = np.zeros((1, 1, 3), dtype=np.uint8)
    red[..., 0] = 255
    # 0.299 * 255 = 76.245
    assert to_luma(Frame(red)).samples[0, 0] == 76


# ------------------------------------------------------------------
# Codecs
# ------------------------------------------------------------------


def test_png_round_trip_is_bit_exact(tmp_path, noisy_frame):
    path = tmp_path / "f.png"
    save_frame(noisy_frame, path)
    assert load_frame(path).same_as(noisy_frame)


def test_jpeg_requires_quality_in_range(tmp_path, noisy_frame):
    with pytest.raises(InvalidInputError):
        save_frame(noisy_frame, tmp_path / "f.jpg", fmt="jpeg", quality=0)
    with pytest.raises(InvalidInputError):
        encode_jpeg(noisy_frame, 101)


def test_jpeg_preserves_dimensions(smooth_frame):
    out = encode_jpeg(smooth_frame, 90)
    assert (out.width, out.height) == (smooth_frame.width, smooth_frame.height)
    diff = np.abs(out.pixels.astype(int) - smooth_frame.pixels.astype(int))
    assert diff.mean() < 3.0


def test_load_rejects_garbage_and_missing(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(FrameFormatError):
        load_frame(bad)
    with pytest.raises(FrameFormatError):
        load_frame(tmp_path / "absent.png")


def test_load_rejects_grayscale(tmp_path):
    from PIL import Image

    path = tmp_path / "grey.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(path)
    with pytest.raises(FrameFormatError):
        load_frame(path)


# ------------------------------------------------------------------
# Content hashing
# ------------------------------------------------------------------


def test_content_hash_depends_on_pixels_and_shape(make_frame):
    a = make_frame(8, 8, seed=1)
    assert content_hash(a) == content_hash(a.copy())
    assert content_hash(a) != content_hash(make_frame(8, 8, seed=2))

    flat = np.zeros((4, 8, 3), dtype=np.uint8)
    assert content_hash(Frame(flat)) != content_hash(Frame(flat.reshape(8, 4, 3)))
    assert hash_key(content_hash(a)) == int(content_hash(a), 16)
