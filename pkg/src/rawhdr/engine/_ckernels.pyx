# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled convolution kernels.

Dense convolutions gather a block of output rows into a double-precision
column buffer and hand the contraction to BLAS ``dgemm``; each output element
is accumulated in double and in a fixed order.
"""

import numpy as np
cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

# Column buffer budget per row block, in doubles.
cdef int COL_BUDGET = 262144


def conv2d(const double[:, :, ::1] x, const double[:, :, :, ::1] w, const double[::1] b, int pad):
    """Stride-1 ``k x k`` convolution with zero padding ``pad``; float64 in and out."""
    cdef int C = x.shape[0], H = x.shape[1], W = x.shape[2]
    cdef int O = w.shape[0], k = w.shape[2]
    if w.shape[1] != C:
        raise ValueError(f"weight expects {w.shape[1]} input channels, got {C}")
    cdef int Hp = H + 2 * pad, Wp = W + 2 * pad
    cdef int Ho = Hp - k + 1, Wo = Wp - k + 1
    if Ho <= 0 or Wo <= 0:
        raise ValueError("input smaller than kernel")
    cdef int K = C * k * k

    xp_arr = np.zeros((C, Hp, Wp), dtype=np.float64)
    xp_arr[:, pad:pad + H, pad:pad + W] = np.asarray(x)
    cdef double[:, :, ::1] xp = xp_arr
    wmat_arr = np.array(np.asarray(w).reshape(O, K))  # writable copy for dgemm
    cdef double[:, ::1] wmat = wmat_arr
    out_arr = np.empty((O, Ho, Wo), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    cdef int R = max(1, min(Ho, COL_BUDGET // max(1, K * Wo)))
    cdef int ld_col = R * Wo
    col_arr = np.empty((K, ld_col), dtype=np.float64)
    cdef double[:, ::1] col = col_arr

    cdef int o, c, ky, kx, r, xx, y0, rb, kidx, m, ldc = Ho * Wo
    cdef double one = 1.0
    cdef char trans = b'N'
    cdef double *src
    cdef double *dst

    with nogil:
        for o in range(O):
            for r in range(Ho * Wo):
                out[o, r // Wo, r % Wo] = b[o]
        y0 = 0
        while y0 < Ho:
            rb = min(R, Ho - y0)
            for c in range(C):
                for ky in range(k):
                    for kx in range(k):
                        kidx = (c * k + ky) * k + kx
                        for r in range(rb):
                            src = &xp[c, y0 + r + ky, kx]
                            dst = &col[kidx, r * Wo]
                            for xx in range(Wo):
                                dst[xx] = src[xx]
            m = rb * Wo
            dgemm(&trans, &trans, &m, &O, &K, &one, &col[0, 0], &ld_col,
                  &wmat[0, 0], &K, &one, &out[0, y0, 0], &ldc)
            y0 += rb
    return out_arr


def depthwise3x3(const double[:, :, ::1] x, const double[:, :, ::1] kern, int pad):
    """Per-channel 3x3 correlation: channel c uses ``kern[c]``."""
    cdef int C = x.shape[0], H = x.shape[1], W = x.shape[2]
    if kern.shape[0] != C:
        raise ValueError("one kernel per channel required")
    cdef int Hp = H + 2 * pad, Wp = W + 2 * pad
    cdef int Ho = Hp - 2, Wo = Wp - 2
    xp_arr = np.zeros((C, Hp, Wp), dtype=np.float64)
    xp_arr[:, pad:pad + H, pad:pad + W] = np.asarray(x)
    cdef double[:, :, ::1] xp = xp_arr
    out_arr = np.empty((C, Ho, Wo), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef int c, y, xx, ky, kx
    cdef double acc
    with nogil:
        for c in range(C):
            for y in range(Ho):
                for xx in range(Wo):
                    acc = 0.0
                    for ky in range(3):
                        for kx in range(3):
                            acc = acc + kern[c, ky, kx] * xp[c, y + ky, xx + kx]
                    out[c, y, xx] = acc
    return out_arr
