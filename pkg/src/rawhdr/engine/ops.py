"""Tensor operations on ``(C, H, W)`` arrays.

Every op preserves the floating dtype of its input: float32 tensors are
accumulated in double inside the kernels and rounded once at the end.
"""

from __future__ import annotations

import numpy as np

from . import kernels


class ShapeError(ValueError):
    pass


def _check(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 3:
        raise ShapeError(f"expected a (C, H, W) tensor, got shape {x.shape}")
    return x


def _dtype(x: np.ndarray):
    return x.dtype if x.dtype in (np.float32, np.float64) else np.dtype(np.float32)


def _as64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def conv2d_3x3(x, weight, bias=None, padding: int = 1) -> np.ndarray:
    x = _check(x)
    weight = np.asarray(weight)
    if weight.shape[1:] != (x.shape[0], 3, 3):
        raise ShapeError(f"weight {weight.shape} incompatible with {x.shape[0]} input channels")
    if bias is None:
        bias = np.zeros(weight.shape[0])
    out = kernels.conv2d(_as64(x), _as64(weight), _as64(bias), padding)
    return out.astype(_dtype(x), copy=False)


def conv2d_1x1(x, weight, bias=None) -> np.ndarray:
    x = _check(x)
    weight = np.asarray(weight)
    weight = weight.reshape(weight.shape[0], -1)
    if weight.shape[1] != x.shape[0]:
        raise ShapeError(f"weight {weight.shape} incompatible with {x.shape[0]} input channels")
    if bias is None:
        bias = np.zeros(weight.shape[0])
    out = kernels.conv2d(_as64(x), _as64(weight[:, :, None, None]), _as64(bias), 0)
    return out.astype(_dtype(x), copy=False)


def depthwise_3x3(x, kernel, scale=None, padding: int = 1) -> np.ndarray:
    """Correlate every channel with ``kernel`` (shared 3x3 or per-channel)
    and multiply channel c by ``scale[c]``."""
    x = _check(x)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape == (3, 3):
        kernel = np.broadcast_to(kernel, (x.shape[0], 3, 3))
    if kernel.shape != (x.shape[0], 3, 3):
        raise ShapeError(f"kernel {kernel.shape} incompatible with {x.shape[0]} channels")
    if scale is not None:
        kernel = kernel * np.asarray(scale, dtype=np.float64)[:, None, None]
    out = kernels.depthwise3x3(_as64(x), _as64(kernel), padding)
    return out.astype(_dtype(x), copy=False)


def relu(x) -> np.ndarray:
    return np.maximum(x, 0).astype(np.asarray(x).dtype, copy=False)


def pixel_unshuffle2(x) -> np.ndarray:
    """``(C, H, W) -> (4C, H/2, W/2)``; channel ``4c + 2i + j`` holds ``x[c, 2y+i, 2x+j]``."""
    x = _check(x)
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"pixel unshuffle needs even spatial dims, got {h}x{w}")
    return np.ascontiguousarray(
        x.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 2, 4, 1, 3).reshape(4 * c, h // 2, w // 2))


def pixel_shuffle2(x) -> np.ndarray:
    x = _check(x)
    c4, h, w = x.shape
    if c4 % 4:
        raise ShapeError(f"pixel shuffle needs a multiple of 4 channels, got {c4}")
    c = c4 // 4
    return np.ascontiguousarray(x.reshape(c, 2, 2, h, w).transpose(0, 3, 1, 4, 2).reshape(c, 2 * h, 2 * w))


def concat(*xs) -> np.ndarray:
    shapes = {x.shape[1:] for x in xs}
    if len(shapes) != 1:
        raise ShapeError(f"cannot concatenate tensors with spatial shapes {shapes}")
    return np.concatenate(xs, axis=0)


def add(*xs) -> np.ndarray:
    if len({x.shape for x in xs}) != 1:
        raise ShapeError("add needs equal shapes")
    out = xs[0].copy()
    for x in xs[1:]:
        out += x
    return out
