import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bayer_index_oracle, lab_formula, lab_oracle
from rawhdr.raw import (PATTERNS, BayerImage, DimensionError, PackedRaw, naive_rgb, normalize_levels,
                        pack_bayer, read_pgm, rgb_to_lab, unpack_bayer, write_pgm)


def test_pack_single_cell():
    planes = pack_bayer(BayerImage(np.array([[10, 20], [30, 40]]), "RGGB")).data
    assert planes[:, 0, 0].tolist() == [10, 20, 30, 40]


@pytest.mark.parametrize("pattern", PATTERNS)
def test_pack_matches_index_oracle(pattern):
    ramp = np.arange(16, dtype=np.uint16).reshape(4, 4)
    got = pack_bayer(BayerImage(ramp, pattern)).data
    expected = bayer_index_oracle(ramp, pattern)
    for plane, ref in zip(got, expected):
        np.testing.assert_array_equal(plane, ref)


def test_bggr_canonicalized_to_rggb_order():
    planes = pack_bayer(BayerImage(np.array([[1, 2], [3, 4]]), "BGGR")).data
    assert planes[:, 0, 0].tolist() == [4, 2, 3, 1]


@pytest.mark.parametrize("pattern", PATTERNS)
def test_pack_unpack_roundtrip_exhaustive_random(pattern, rng):
    for _ in range(50):
        mosaic = rng.integers(0, 4096, size=(4, 4)).astype(np.uint16)
        back = unpack_bayer(pack_bayer(BayerImage(mosaic, pattern)), pattern)
        np.testing.assert_array_equal(back.data, mosaic)


def test_unpack_single_cell():
    packed = PackedRaw(np.array([1.0, 2.0, 3.0, 4.0]).reshape(4, 1, 1))
    assert unpack_bayer(packed, "RGGB").data.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_odd_dimensions_rejected():
    with pytest.raises(DimensionError):
        BayerImage(np.zeros((3, 4), dtype=np.uint16))


def test_level_invariants_enforced():
    with pytest.raises(ValueError):
        BayerImage(np.zeros((2, 2)), black_level=100, white_level=100)
    with pytest.raises(ValueError):
        BayerImage(np.full((2, 2), 5000), bit_depth=12)


def test_normalize_levels_anchors():
    raw = BayerImage(np.array([[64, 4095], [2079.5, 10]]), black_level=64, white_level=4095)
    r, g1, g2, b = normalize_levels(raw).data[:, 0, 0]
    assert r == 0.0 and g1 == 1.0
    assert g2 == pytest.approx(0.5, abs=1e-12)
    assert b == 0.0  # below black clamps to 0
    assert normalize_levels(raw).exposure_scale == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4095), min_size=4, max_size=4))
def test_normalize_levels_monotone(values):
    values = sorted(values)
    raw = BayerImage(np.array(values).reshape(2, 2), black_level=64, white_level=4000)
    out = normalize_levels(raw).data[:, 0, 0]
    assert np.all(np.diff(out) >= 0)


def test_naive_rgb_averages_greens(rng):
    packed = PackedRaw(np.array([0.1, 0.2, 0.4, 0.7]).reshape(4, 1, 1))
    r, g, b = naive_rgb(packed).data[:, 0, 0]
    assert (r, b) == (0.1, 0.7)
    assert g == pytest.approx(0.3, abs=1e-15)

    planes = rng.random((4, 8, 8))
    rgb = naive_rgb(PackedRaw(planes)).data
    for y in range(8):
        for x in range(8):
            assert rgb[1, y, x] == (planes[1, y, x] + planes[2, y, x]) / 2
            assert rgb[0, y, x] == planes[0, y, x] and rgb[2, y, x] == planes[3, y, x]


def test_lab_white_and_black():
    white = rgb_to_lab(np.ones((3, 1, 1))).data[:, 0, 0]
    assert white[0] == pytest.approx(100.0, abs=1e-9)
    assert abs(white[1]) < 0.01 and abs(white[2]) < 0.01
    np.testing.assert_array_equal(rgb_to_lab(np.zeros((3, 1, 1))).data[:, 0, 0], [0.0, 0.0, 0.0])


def test_lab_mid_gray_matches_oracles():
    lab = rgb_to_lab(np.full((3, 1, 1), 0.18)).data[:, 0, 0]
    assert lab[0] == pytest.approx(lab_formula((0.18, 0.18, 0.18))[0], abs=0.05)
    assert lab[0] == pytest.approx(lab_oracle(np.full((3, 1, 1), 0.18))[0, 0, 0], abs=0.05)


def test_lab_random_colors_match_skimage(rng):
    rgb = rng.random((3, 16, 16))
    np.testing.assert_allclose(rgb_to_lab(rgb).data, lab_oracle(rgb), atol=0.01)


def test_lab_clips_hdr_values():
    np.testing.assert_array_equal(rgb_to_lab(np.full((3, 1, 1), 3.0)).data, rgb_to_lab(np.ones((3, 1, 1))).data)


def test_neutral_packed_has_no_chroma(rng):
    level = rng.random((1, 8, 8))
    lab = rgb_to_lab(naive_rgb(PackedRaw(np.repeat(level, 4, axis=0)))).data
    assert np.abs(lab[1:]).max() < 0.01


@pytest.mark.parametrize("bit_depth", [8, 12, 16])
def test_pgm_roundtrip(tmp_path, rng, bit_depth):
    data = rng.integers(0, 2**bit_depth, size=(6, 8)).astype(np.uint16)
    raw = BayerImage(data, "GRBG", black_level=3, white_level=2**bit_depth - 1, bit_depth=bit_depth)
    path = tmp_path / "x.pgm"
    write_pgm(path, raw)
    back = read_pgm(path)
    np.testing.assert_array_equal(back.data, data)
    assert (back.pattern, back.black_level, back.white_level, back.bit_depth) == ("GRBG", 3, 2**bit_depth - 1, bit_depth)


def test_pgm_is_big_endian_16bit(tmp_path):
    path = tmp_path / "x.pgm"
    write_pgm(path, BayerImage(np.array([[0x0102, 0], [0, 0]]), bit_depth=12))
    buf = path.read_bytes()
    assert buf.startswith(b"P5\n2 2\n4095\n")
    assert buf[len(b"P5\n2 2\n4095\n"):][:2] == b"\x01\x02"
