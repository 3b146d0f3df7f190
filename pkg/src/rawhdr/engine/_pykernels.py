"""Pure numpy fallback for the compiled kernels (same signatures, float64)."""

import numpy as np


def conv2d(x, w, b, pad):
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    C, H, W = x.shape
    O, Cw, k, _ = w.shape
    if Cw != C:
        raise ValueError(f"weight expects {Cw} input channels, got {C}")
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    Ho, Wo = H + 2 * pad - k + 1, W + 2 * pad - k + 1
    if Ho <= 0 or Wo <= 0:
        raise ValueError("input smaller than kernel")
    out = np.empty((O, Ho, Wo))
    out[:] = np.asarray(b, dtype=np.float64)[:, None, None]
    for ky in range(k):
        for kx in range(k):
            tap = xp[:, ky:ky + Ho, kx:kx + Wo].reshape(C, -1)
            out += (w[:, :, ky, kx] @ tap).reshape(O, Ho, Wo)
    return out


def depthwise3x3(x, kern, pad):
    x = np.asarray(x, dtype=np.float64)
    kern = np.asarray(kern, dtype=np.float64)
    C, H, W = x.shape
    if kern.shape[0] != C:
        raise ValueError("one kernel per channel required")
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    Ho, Wo = H + 2 * pad - 2, W + 2 * pad - 2
    out = np.zeros((C, Ho, Wo))
    for ky in range(3):
        for kx in range(3):
            out += kern[:, ky, kx, None, None] * xp[:, ky:ky + Ho, kx:kx + Wo]
    return out
