"""Raw LDR-HDR pair formation and synthetic motion quadruplets.

Two clean, normalized raws of a quasi-static scene become a noisy long
exposure, a noisy short exposure and a clean ground truth. All three are
returned in the scene-linear domain of the short exposure ("aligned").

Sub-seeds are derived from ``PairConfig.seed`` as
``SeedSequence([seed, stream]).generate_state(1)[0]`` with streams
0 = ratio draw, 1 = long-exposure noise, 2 = short-exposure noise, 3 = motion.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .raw import DimensionError, PackedRaw
from .sensor import DEFAULT_LONG_NOISE, DEFAULT_SHORT_NOISE, NoiseModel, add_noise

STREAM_RATIO, STREAM_LONG, STREAM_SHORT, STREAM_MOTION = range(4)


def derive_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


@dataclass(frozen=True)
class PairConfig:
    """``ratio=None`` draws the exposure ratio uniformly from ``allowed_ratios``.

    A noise model set to ``None`` disables noise for that exposure.
    """

    ratio: int | None = None
    allowed_ratios: tuple[int, ...] = (4, 8, 16)
    bit_depth: int = 12
    noise_long: NoiseModel | None = DEFAULT_LONG_NOISE
    noise_short: NoiseModel | None = DEFAULT_SHORT_NOISE
    seed: int = 0

    def __post_init__(self):
        if self.ratio is not None and self.ratio < 2:
            raise ValueError("exposure ratio must be >= 2")
        if any(r < 2 for r in self.allowed_ratios):
            raise ValueError("allowed ratios must all be >= 2")

    @property
    def max_dn(self) -> int:
        return 2**self.bit_depth - 1

    @property
    def full_scale(self) -> int:
        return 2**self.bit_depth

    def noiseless(self) -> "PairConfig":
        return replace(self, noise_long=None, noise_short=None)


@dataclass(frozen=True)
class MotionSpec:
    width: int
    height: int
    dx: int
    dy: int
    x0: int
    y0: int

    def as_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "dx": self.dx, "dy": self.dy,
                "x0": self.x0, "y0": self.y0}


@dataclass(frozen=True)
class PairSample:
    long: PackedRaw
    short: PackedRaw
    gt: PackedRaw
    ratio: int
    mask: np.ndarray | None = None
    motion: MotionSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = self.gt.shape
        if self.long.shape != shape or self.short.shape != shape:
            raise DimensionError("long, short and gt must share dimensions")
        if self.mask is not None:
            if self.mask.shape != shape[1:]:
                raise DimensionError("mask must match the plane dimensions")
            if not np.isin(self.mask, (0, 1)).all():
                raise ValueError("mask must be binary")


def choose_ratio(cfg: PairConfig) -> int:
    if cfg.ratio is not None:
        if cfg.ratio not in cfg.allowed_ratios:
            warnings.warn(f"exposure ratio {cfg.ratio} is outside {cfg.allowed_ratios}", stacklevel=3)
        return int(cfg.ratio)
    rng = np.random.default_rng(derive_seed(cfg.seed, STREAM_RATIO))
    return int(rng.choice(cfg.allowed_ratios))


def form_pair(clean1, clean2, cfg: PairConfig, *, align: bool = True) -> PairSample:
    """Simulate the long/short exposures and ground truth from two clean raws.

    Both clean raws are scaled to ``2**bit_depth * r`` digital numbers. The
    long exposure is clipped to ``[0, 2**bit_depth - 1]`` directly, the short
    one after dividing by ``r``. Both are normalized by ``2**bit_depth`` and
    made noisy; the ground truth is ``clean2`` itself. With ``align`` the
    long exposure is divided by ``r`` so all three share one brightness scale.
    """
    a = np.asarray(clean1, dtype=np.float64)
    b = np.asarray(clean2, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"clean raws differ in shape: {a.shape} vs {b.shape}")
    r = choose_ratio(cfg)
    scale = float(cfg.full_scale * r)
    long_dn = np.clip(a * scale, 0.0, cfg.max_dn)
    short_dn = np.clip(b * scale / r, 0.0, cfg.max_dn)
    gt = b.copy()

    long_ = PackedRaw(long_dn / cfg.full_scale, exposure_scale=float(r))
    short = PackedRaw(short_dn / cfg.full_scale, exposure_scale=1.0)
    if cfg.noise_long is not None:
        long_ = add_noise(long_, cfg.noise_long, derive_seed(cfg.seed, STREAM_LONG))
    if cfg.noise_short is not None:
        short = add_noise(short, cfg.noise_short, derive_seed(cfg.seed, STREAM_SHORT))
    if align:
        long_ = PackedRaw(long_.data / r, exposure_scale=1.0)
    meta = {"aligned": align, "saturated_long": int(np.count_nonzero(a * scale > cfg.max_dn))}
    return PairSample(long_, short, PackedRaw(gt), ratio=r, meta=meta)


def _check_patch(shape, max_size: int, max_offset: int) -> None:
    h, w = shape
    need = max_size + max_offset
    if h < need or w < need:
        raise DimensionError(f"patch {h}x{w} too small for {max_size}px rectangles "
                             f"moved by up to {max_offset}px")


def sample_motion(shape, rng: np.random.Generator, size_range=(40, 60), max_offset: int = 30) -> MotionSpec:
    h, w = shape
    _check_patch(shape, size_range[1], max_offset)
    rw, rh = (int(v) for v in rng.integers(size_range[0], size_range[1] + 1, size=2))
    dx, dy = (int(v) for v in rng.integers(-max_offset, max_offset + 1, size=2))
    x0 = int(rng.integers(max(0, -dx), w - rw - max(0, dx) + 1))
    y0 = int(rng.integers(max(0, -dy), h - rh - max(0, dy) + 1))
    return MotionSpec(rw, rh, dx, dy, x0, y0)


def apply_motion(patch, spec: MotionSpec) -> tuple[PackedRaw, np.ndarray]:
    """Copy the source rectangle onto its displaced location; mask both regions."""
    data = np.array(patch, dtype=np.float64)
    h, w = data.shape[1:]
    src = (slice(spec.y0, spec.y0 + spec.height), slice(spec.x0, spec.x0 + spec.width))
    dst = (slice(spec.y0 + spec.dy, spec.y0 + spec.dy + spec.height),
           slice(spec.x0 + spec.dx, spec.x0 + spec.dx + spec.width))
    for y, x in ((spec.y0, spec.x0), (spec.y0 + spec.dy, spec.x0 + spec.dx)):
        if y < 0 or x < 0 or y + spec.height > h or x + spec.width > w:
            raise DimensionError("motion rectangle leaves the patch")
    moved = data[(slice(None),) + src].copy()
    data[(slice(None),) + dst] = moved
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[src] = 1
    mask[dst] = 1
    scale = patch.exposure_scale if isinstance(patch, PackedRaw) else 1.0
    return PackedRaw(data, exposure_scale=scale), mask


def synth_motion(long_patch, seed: int) -> tuple[PackedRaw, np.ndarray, MotionSpec]:
    shape = np.asarray(long_patch).shape[1:]
    if min(shape) < 128:
        raise DimensionError(f"motion synthesis needs a patch of at least 128x128, got {shape}")
    spec = sample_motion(shape, np.random.default_rng(seed))
    moved, mask = apply_motion(long_patch, spec)
    return moved, mask, spec


def build_quadruplet(clean1, clean2, cfg: PairConfig) -> PairSample:
    """Pair formation followed by synthetic motion on the aligned long exposure."""
    pair = form_pair(clean1, clean2, cfg)
    moved, mask, spec = synth_motion(pair.long, derive_seed(cfg.seed, STREAM_MOTION))
    return replace(pair, long=moved, mask=mask, motion=spec)


def extract_patches(sample: PairSample, size: int, stride: int, seed: int | None = None) -> list[PairSample]:
    """Tile a sample into ``size x size`` patches in raster order.

    A ``seed`` shuffles the patch order reproducibly.
    """
    h, w = sample.gt.shape[1:]
    if size > h or size > w:
        raise DimensionError(f"patch size {size} exceeds image {h}x{w}")
    patches = []
    for y in range(0, h - size + 1, stride):
        for x in range(0, w - size + 1, stride):
            ys, xs = slice(y, y + size), slice(x, x + size)

            def crop(p: PackedRaw) -> PackedRaw:
                return PackedRaw(p.data[:, ys, xs].copy(), p.exposure_scale)

            mask = None if sample.mask is None else sample.mask[ys, xs].copy()
            patches.append(PairSample(crop(sample.long), crop(sample.short), crop(sample.gt),
                                      sample.ratio, mask, None, {**sample.meta, "origin": (y, x)}))
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(patches))
        patches = [patches[i] for i in order]
    return patches
