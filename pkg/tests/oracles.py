"""Independent reference implementations used only by the tests.

These are deliberately naive (explicit loops, textbook formulas, third-party
libraries) so they share no code path with the package.
"""

import numpy as np


def bayer_index_oracle(mosaic, pattern):
    """Return R, G1, G2, B planes by iterating the mosaic pixel by pixel."""
    h, w = mosaic.shape
    planes = {k: np.zeros((h // 2, w // 2), dtype=mosaic.dtype) for k in ("R", "G1", "G2", "B")}
    for y in range(h):
        for x in range(w):
            color = pattern[(y % 2) * 2 + (x % 2)]
            if color == "G":
                # first G in reading order of the 2x2 cell is G1
                first_g = pattern.index("G")
                key = "G1" if (y % 2) * 2 + (x % 2) == first_g else "G2"
            else:
                key = color
            planes[key][y // 2, x // 2] = mosaic[y, x]
    return [planes["R"], planes["G1"], planes["G2"], planes["B"]]


def naive_conv(x, w, b=None, pad=1):
    """Quintuple-loop correlation with zero padding."""
    C, H, W = x.shape
    O, _, k, _ = w.shape
    xp = np.zeros((C, H + 2 * pad, W + 2 * pad))
    xp[:, pad:pad + H, pad:pad + W] = x
    Ho, Wo = H + 2 * pad - k + 1, W + 2 * pad - k + 1
    out = np.zeros((O, Ho, Wo))
    for o in range(O):
        for y in range(Ho):
            for xx in range(Wo):
                acc = 0.0 if b is None else float(b[o])
                for c in range(C):
                    for ky in range(k):
                        for kx in range(k):
                            acc += w[o, c, ky, kx] * xp[c, y + ky, xx + kx]
                out[o, y, xx] = acc
    return out


def naive_conv_fast(x, w, b=None, pad=1):
    """Window-sum correlation via sliding windows (for larger oracle checks)."""
    C, H, W = x.shape
    k = w.shape[-1]
    xp = np.pad(np.asarray(x, dtype=np.float64), ((0, 0), (pad, pad), (pad, pad)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))  # C, Ho, Wo, k, k
    out = np.einsum("chwij,ocij->ohw", win, np.asarray(w, dtype=np.float64))
    if b is not None:
        out += np.asarray(b)[:, None, None]
    return out


def naive_tcb(p, x):
    """Branch-by-branch block evaluation with the naive convolution.

    Two-stage branches evaluate their 1x1 stage on the zero-padded input.
    """
    from rawhdr.repnet.tcb import LAPLACIAN, SOBEL_X, SOBEL_Y

    x = np.asarray(x, dtype=np.float64)
    xpad = np.pad(x, ((0, 0), (1, 1), (1, 1)))

    def one(z, w, b):
        return np.einsum("oc,chw->ohw", w, z) + b[:, None, None]

    def dw(z, k, scale):
        kern = np.zeros((z.shape[0], z.shape[0], 3, 3))
        for c in range(z.shape[0]):
            kern[c, c] = scale[c] * k
        return naive_conv_fast(z, kern, pad=0)

    out = naive_conv_fast(x, p.main_weight, p.main_bias)
    out += naive_conv_fast(one(xpad, p.expand_weight, p.expand_bias), p.squeeze_weight, p.squeeze_bias, pad=0)
    s = one(xpad, p.sobel_pre_weight, p.sobel_pre_bias)
    out += dw(s, SOBEL_X, p.sobel_scale_x) + dw(s, SOBEL_Y, p.sobel_scale_y)
    if p.laplacian_scale is not None:
        out += dw(one(xpad, p.laplacian_pre_weight, p.laplacian_pre_bias), LAPLACIAN, p.laplacian_scale)
    out += one(x, p.conv1x1_weight, p.conv1x1_bias)
    if p.use_identity:
        out += x
    return out


def lab_oracle(rgb_linear):
    """Lab via scikit-image, which expects gamma-encoded sRGB: encode first."""
    from skimage.color import rgb2lab

    lin = np.clip(np.asarray(rgb_linear, dtype=np.float64), 0, 1)
    enc = np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1 / 2.4) - 0.055)
    return np.moveaxis(rgb2lab(np.moveaxis(enc, 0, -1), illuminant="D65"), -1, 0)


def lab_formula(rgb):
    """Textbook linear-sRGB -> Lab for one RGB triple."""
    r, g, b = (min(max(v, 0.0), 1.0) for v in rgb)
    X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b
    Xn, Yn, Zn = 0.95047, 1.0, 1.08883

    def f(t):
        return t ** (1 / 3) if t > 216 / 24389 else (24389 / 27 * t + 16) / 116

    return (116 * f(Y / Yn) - 16, 500 * (f(X / Xn) - f(Y / Yn)), 200 * (f(Y / Yn) - f(Z / Zn)))


def ms_ssim_oracle(a, b, weights=(0.0448, 0.2856, 0.3001, 0.2363, 0.1333)):
    """MS-SSIM with an explicit 2-D Gaussian window over sliding patches."""
    sig = 1.5
    ax = np.arange(11) - 5
    g2 = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * sig**2))
    g2 /= g2.sum()
    c1, c2 = 0.01**2, 0.03**2

    def stats(x, y):
        wx = np.lib.stride_tricks.sliding_window_view(x, (11, 11))
        wy = np.lib.stride_tricks.sliding_window_view(y, (11, 11))
        mx = np.einsum("hwij,ij->hw", wx, g2)
        my = np.einsum("hwij,ij->hw", wy, g2)
        vx = np.einsum("hwij,ij->hw", wx * wx, g2) - mx**2
        vy = np.einsum("hwij,ij->hw", wy * wy, g2) - my**2
        cxy = np.einsum("hwij,ij->hw", wx * wy, g2) - mx * my
        cs = (2 * cxy + c2) / (vx + vy + c2)
        lum = (2 * mx * my + c1) / (mx**2 + my**2 + c1)
        return (lum * cs).mean(), cs.mean()

    def down(x):
        h, w = x.shape
        x = x[: h // 2 * 2, : w // 2 * 2]
        return x.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))

    vals = []
    for ca, cb in zip(np.asarray(a, float), np.asarray(b, float)):
        prod = 1.0
        for i, wt in enumerate(weights):
            s, cs = stats(ca, cb)
            if i == len(weights) - 1:
                prod *= max(s, 0.0) ** wt
            else:
                prod *= max(cs, 0.0) ** wt
                ca, cb = down(ca), down(cb)
        vals.append(prod)
    return float(np.mean(vals))
