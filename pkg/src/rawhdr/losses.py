"""Forward-only evaluation of the training objective (no gradients)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .metrics import _pair, ms_ssim
from .raw import DimensionError, naive_rgb


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0  # motion-masked MS-SSIM
    beta: float = 1.0  # Bayer color loss
    gamma: float = 1.0  # pixel RMSE
    eta_w: float = 1.0  # MS-SSIM

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma, self.eta_w) < 0:
            raise ValueError("loss weights must be non-negative")

    @classmethod
    def from_json(cls, path) -> "LossWeights":
        return cls(**json.loads(Path(path).read_text()))


@dataclass
class LossReport:
    l_pix: float
    l_ssim: float
    l_amss: float
    l_bayer: float
    total: float

    def as_dict(self) -> dict:
        return asdict(self)


def l_pix(out, gt) -> float:
    """Root-mean-square pixel error over all channels."""
    out, gt = _pair(out, gt)
    return float(np.sqrt(np.mean((out - gt) ** 2)))


def l_ssim(out, gt) -> float:
    return 1.0 - ms_ssim(out, gt)


def l_amss(out, gt, mask) -> float:
    out, gt = _pair(out, gt)
    m = np.asarray(mask)
    if m.shape != out.shape[-2:]:
        raise DimensionError(f"mask {m.shape} does not match image planes {out.shape[-2:]}")
    if not np.isin(m, (0, 1)).all():
        raise ValueError("mask must be binary")
    if not m.any():
        return 0.0
    m = m.astype(np.float64)
    return 1.0 - ms_ssim(out * m, gt * m)


def l_bayer(out, gt) -> float:
    """Mean per-pixel cosine distance between naive RGB renderings.

    A pixel where either RGB vector is zero counts as perfectly similar.
    """
    out, gt = _pair(out, gt)
    u = naive_rgb(out).data
    v = naive_rgb(gt).data
    dot = (u * v).sum(axis=0)
    norms = np.sqrt((u * u).sum(axis=0)) * np.sqrt((v * v).sum(axis=0))
    zero = norms == 0
    cos = np.where(zero, 1.0, dot / np.where(zero, 1.0, norms))
    return float(np.mean(1.0 - np.clip(cos, -1.0, 1.0)))


def total_loss(out, gt, mask=None, weights: LossWeights = LossWeights()) -> LossReport:
    """Weighted sum of all loss terms. Without a mask the motion term is 0."""
    parts = {
        "l_pix": l_pix(out, gt),
        "l_ssim": l_ssim(out, gt),
        "l_amss": 0.0 if mask is None else l_amss(out, gt, mask),
        "l_bayer": l_bayer(out, gt),
    }
    total = (weights.alpha * parts["l_amss"] + weights.beta * parts["l_bayer"]
             + weights.gamma * parts["l_pix"] + weights.eta_w * parts["l_ssim"])
    return LossReport(total=total, **parts)
