"""PSNR, SSIM, MS-SSIM and CIE76 color difference on packed raws.

SSIM uses an 11-tap Gaussian window (sigma 1.5) applied without padding, so
only fully covered windows contribute. MS-SSIM downsamples by 2x2 averaging
(odd trailing rows/columns dropped) between its five scales.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .raw import DimensionError, naive_rgb, rgb_to_lab

K1, K2 = 0.01, 0.03
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    ms_ssim: float
    delta_e: float

    def as_dict(self) -> dict:
        return asdict(self)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[None], b[None]
    return a, b


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    a, b = _pair(a, b)
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable valid-mode filtering over the last two axes."""
    n = len(g)
    h, w = img.shape[-2:]
    rows = sum(g[k] * img[..., k:h - n + 1 + k, :] for k in range(n))
    return sum(g[k] * rows[..., :, k:w - n + 1 + k] for k in range(n))


def _ssim_terms(a: np.ndarray, b: np.ndarray, data_range: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean SSIM and mean contrast-structure term."""
    g = gaussian_window()
    if min(a.shape[-2:]) < len(g):
        raise DimensionError(f"image {a.shape[-2:]} smaller than the {len(g)}-tap window")
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    cs_map = (2.0 * cov + c2) / (var_a + var_b + c2)
    ssim_map = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1) * cs_map
    return ssim_map.mean(axis=(-2, -1)), cs_map.mean(axis=(-2, -1))


def ssim(a, b, data_range: float = 1.0) -> float:
    """Mean SSIM over channels."""
    a, b = _pair(a, b)
    s, _ = _ssim_terms(a, b, data_range)
    return float(s.mean())


def _downsample(x: np.ndarray) -> np.ndarray:
    h, w = x.shape[-2:]
    x = x[..., : h - h % 2, : w - w % 2]
    return 0.25 * (x[..., 0::2, 0::2] + x[..., 1::2, 0::2] + x[..., 0::2, 1::2] + x[..., 1::2, 1::2])


def ms_ssim(a, b, data_range: float = 1.0, weights=MS_SSIM_WEIGHTS) -> float:
    """Multi-scale SSIM, computed per channel and then averaged.

    Negative contrast-structure terms are clamped to 0 before exponentiation.
    """
    a, b = _pair(a, b)
    levels = len(weights)
    need = WINDOW_SIZE * 2 ** (levels - 1)
    if min(a.shape[-2:]) < need:
        raise DimensionError(f"MS-SSIM with {levels} scales needs >= {need}px per side, got {a.shape[-2:]}")
    w = np.asarray(weights, dtype=np.float64)
    factors = []
    for level in range(levels):
        s, cs = _ssim_terms(a, b, data_range)
        if level == levels - 1:
            factors.append(np.maximum(s, 0.0) ** w[level])
        else:
            factors.append(np.maximum(cs, 0.0) ** w[level])
            a, b = _downsample(a), _downsample(b)
    per_channel = np.prod(np.stack(factors), axis=0)
    return float(per_channel.mean())


def delta_e(out, gt) -> float:
    """Mean per-pixel CIE76 distance after naive RGB and Lab conversion."""
    out, gt = _pair(out, gt)
    lab_out = rgb_to_lab(naive_rgb(out)).data
    lab_gt = rgb_to_lab(naive_rgb(gt)).data
    return float(np.sqrt(((lab_out - lab_gt) ** 2).sum(axis=0)).mean())


def evaluate(out, gt, peak: float = 1.0) -> MetricsReport:
    return MetricsReport(psnr(out, gt, peak), ssim(out, gt), ms_ssim(out, gt), delta_e(out, gt))
