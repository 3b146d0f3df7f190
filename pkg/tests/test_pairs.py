import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rawhdr.pairs import (MotionSpec, PairConfig, apply_motion, build_quadruplet, choose_ratio, derive_seed,
                          extract_patches, form_pair, sample_motion, synth_motion)
from rawhdr.raw import DimensionError, PackedRaw


def _scene(rng, shape=(4, 32, 32), peak=1.0):
    return PackedRaw(rng.random(shape) * peak)


@pytest.mark.parametrize("r", [4, 8, 16])
def test_noiseless_pair_is_aligned(rng, r):
    clean = _scene(rng, peak=1.0 / 16)  # never saturates at r <= 16
    s = form_pair(clean, clean, PairConfig(ratio=r).noiseless())
    np.testing.assert_array_equal(s.long.data, s.short.data)
    np.testing.assert_array_equal(s.short.data, s.gt.data)
    assert s.meta["saturated_long"] == 0


def test_saturated_pixel_example():
    clean = PackedRaw(np.full((4, 1, 1), 0.5))
    s = form_pair(clean, clean, PairConfig(ratio=4).noiseless(), align=False)
    assert s.long.data[0, 0, 0] == 4095 / 4096  # clipped at the 12-bit ceiling
    assert s.short.data[0, 0, 0] == 0.5
    aligned = form_pair(clean, clean, PairConfig(ratio=4).noiseless())
    assert aligned.long.data[0, 0, 0] == pytest.approx(4095 / 4096 / 4)
    assert aligned.meta["saturated_long"] == 4


def test_short_exposure_quantized_headroom():
    clean = PackedRaw(np.full((4, 2, 2), 1.0))
    s = form_pair(clean, clean, PairConfig(ratio=8).noiseless())
    assert s.short.data.max() == 4095 / 4096
    assert s.gt.data.max() == 1.0


def test_exposure_scale_recorded():
    clean = PackedRaw(np.full((4, 2, 2), 0.01))
    cfg = PairConfig(ratio=8).noiseless()
    assert form_pair(clean, clean, cfg, align=False).long.exposure_scale == 8.0
    assert form_pair(clean, clean, cfg).long.exposure_scale == 1.0


def test_ratio_draw_is_seeded_and_in_set():
    draws = {choose_ratio(PairConfig(seed=s)) for s in range(60)}
    assert draws == {4, 8, 16}
    assert choose_ratio(PairConfig(seed=7)) == choose_ratio(PairConfig(seed=7))


def test_ratio_outside_set_warns():
    with pytest.warns(UserWarning):
        assert choose_ratio(PairConfig(ratio=32)) == 32
    with pytest.raises(ValueError):
        PairConfig(ratio=1)


def test_derive_seed_streams_differ():
    seeds = {derive_seed(42, k) for k in range(4)}
    assert len(seeds) == 4


def test_mismatched_shapes_rejected(rng):
    with pytest.raises(DimensionError):
        form_pair(_scene(rng), _scene(rng, (4, 16, 32)), PairConfig())


def test_noisy_pair_reproducible(rng):
    a, b = _scene(rng, peak=0.05), _scene(rng, peak=0.05)
    s1 = form_pair(a, b, PairConfig(seed=3))
    s2 = form_pair(a, b, PairConfig(seed=3))
    assert s1.long.data.tobytes() == s2.long.data.tobytes()
    assert s1.short.data.tobytes() == s2.short.data.tobytes()
    assert not np.array_equal(s1.short.data, s1.gt.data)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(128, 200), st.integers(128, 200))
def test_sampled_motion_stays_inside(seed, h, w):
    spec = sample_motion((h, w), np.random.default_rng(seed))
    assert 40 <= spec.width <= 60 and 40 <= spec.height <= 60
    assert -30 <= spec.dx <= 30 and -30 <= spec.dy <= 30
    for x, y in ((spec.x0, spec.y0), (spec.x0 + spec.dx, spec.y0 + spec.dy)):
        assert 0 <= x <= w - spec.width and 0 <= y <= h - spec.height


def test_motion_copies_source_onto_destination(rng):
    patch = PackedRaw(rng.random((4, 128, 128)))
    spec = MotionSpec(width=40, height=50, dx=10, dy=-5, x0=20, y0=30)
    moved, mask = apply_motion(patch, spec)
    np.testing.assert_array_equal(moved.data[:, 25:75, 30:70], patch.data[:, 30:80, 20:60])
    assert mask.sum() == np.count_nonzero(mask)
    expected = np.zeros((128, 128), dtype=np.uint8)
    expected[30:80, 20:60] = 1
    expected[25:75, 30:70] = 1
    np.testing.assert_array_equal(mask, expected)
    # outside the mask nothing changed
    np.testing.assert_array_equal(moved.data[:, mask == 0], patch.data[:, mask == 0])


def test_zero_offset_motion_is_a_no_op_with_single_rect(rng):
    patch = PackedRaw(rng.random((4, 128, 128)))
    moved, mask = apply_motion(patch, MotionSpec(45, 55, 0, 0, 10, 12))
    np.testing.assert_array_equal(moved.data, patch.data)
    assert mask.sum() == 45 * 55


def test_motion_outside_patch_rejected(rng):
    with pytest.raises(DimensionError):
        apply_motion(PackedRaw(rng.random((4, 128, 128))), MotionSpec(60, 60, 30, 0, 60, 0))
    with pytest.raises(DimensionError):
        synth_motion(rng.random((4, 64, 64)), seed=0)


def test_quadruplet_fields(rng):
    clean = _scene(rng, (4, 128, 128), peak=0.05)
    q = build_quadruplet(clean, clean, PairConfig(seed=11))
    assert q.mask.shape == (128, 128) and set(np.unique(q.mask)) <= {0, 1}
    assert q.motion is not None
    assert q.ratio in (4, 8, 16)
    q2 = build_quadruplet(clean, clean, PairConfig(seed=11))
    assert q.long.data.tobytes() == q2.long.data.tobytes() and q.motion == q2.motion


def test_extract_patches_raster_and_shuffle(rng):
    clean = _scene(rng, (4, 128, 128), peak=0.05)
    q = build_quadruplet(clean, clean, PairConfig(seed=1))
    patches = extract_patches(q, 64, 32)
    assert len(patches) == 9
    assert [p.meta["origin"] for p in patches[:3]] == [(0, 0), (0, 32), (0, 64)]
    np.testing.assert_array_equal(patches[4].gt.data, q.gt.data[:, 32:96, 32:96])
    np.testing.assert_array_equal(patches[4].mask, q.mask[32:96, 32:96])
    shuffled = extract_patches(q, 64, 32, seed=5)
    assert sorted(p.meta["origin"] for p in shuffled) == sorted(p.meta["origin"] for p in patches)
    assert [p.meta["origin"] for p in shuffled] == [p.meta["origin"] for p in extract_patches(q, 64, 32, seed=5)]
    with pytest.raises(DimensionError):
        extract_patches(q, 256, 32)
