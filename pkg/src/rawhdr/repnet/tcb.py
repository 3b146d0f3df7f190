"""Topological convolution blocks and their fusion into one 3x3 convolution.

A block sums these branches, all producing ``C_out`` channels at the input
resolution:

* a plain 3x3 convolution,
* a 1x1 expansion to ``C_mid`` channels followed by a 3x3 squeeze,
* a 1x1 projection followed by fixed Sobel-x / Sobel-y depthwise filters,
  each with a learnable per-channel scale,
* (decoder blocks only) a 1x1 projection followed by a fixed Laplacian,
* a 1x1 convolution,
* the identity, when ``C_in == C_out``.

The 1x1 stage of every two-stage branch runs on the zero-padded input and the
following 3x3 stage uses no padding. The intermediate border therefore holds
the 1x1 bias instead of zeros, which is what makes the fused kernel exact at
image borders as well as in the interior.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..engine import ops

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()
LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def fixed_kernels() -> dict[str, np.ndarray]:
    return {"sobel_x": SOBEL_X.copy(), "sobel_y": SOBEL_Y.copy(), "laplacian": LAPLACIAN.copy()}


@dataclass
class Conv3x3:
    weight: np.ndarray  # (C_out, C_in, 3, 3)
    bias: np.ndarray  # (C_out,)

    def __post_init__(self):
        if self.weight.ndim != 4 or self.weight.shape[2:] != (3, 3):
            raise ValueError(f"bad 3x3 weight shape {self.weight.shape}")
        if self.bias.shape != (self.weight.shape[0],):
            raise ValueError("bias length must equal output channels")

    @property
    def c_out(self) -> int:
        return self.weight.shape[0]

    @property
    def c_in(self) -> int:
        return self.weight.shape[1]


@dataclass
class TcbParams:
    main_weight: np.ndarray
    main_bias: np.ndarray
    expand_weight: np.ndarray  # (C_mid, C_in)
    expand_bias: np.ndarray
    squeeze_weight: np.ndarray  # (C_out, C_mid, 3, 3)
    squeeze_bias: np.ndarray
    sobel_pre_weight: np.ndarray  # (C_out, C_in)
    sobel_pre_bias: np.ndarray
    sobel_scale_x: np.ndarray  # (C_out,)
    sobel_scale_y: np.ndarray
    conv1x1_weight: np.ndarray  # (C_out, C_in)
    conv1x1_bias: np.ndarray
    use_identity: bool = False
    laplacian_pre_weight: np.ndarray | None = None
    laplacian_pre_bias: np.ndarray | None = None
    laplacian_scale: np.ndarray | None = None

    def __post_init__(self):
        c_out, c_in = self.main_weight.shape[:2]
        c_mid = self.expand_weight.shape[0]
        expected = {
            "main_weight": (c_out, c_in, 3, 3), "main_bias": (c_out,),
            "expand_weight": (c_mid, c_in), "expand_bias": (c_mid,),
            "squeeze_weight": (c_out, c_mid, 3, 3), "squeeze_bias": (c_out,),
            "sobel_pre_weight": (c_out, c_in), "sobel_pre_bias": (c_out,),
            "sobel_scale_x": (c_out,), "sobel_scale_y": (c_out,),
            "conv1x1_weight": (c_out, c_in), "conv1x1_bias": (c_out,),
            "laplacian_pre_weight": (c_out, c_in), "laplacian_pre_bias": (c_out,),
            "laplacian_scale": (c_out,),
        }
        lap = [self.laplacian_pre_weight, self.laplacian_pre_bias, self.laplacian_scale]
        if any(v is None for v in lap) and not all(v is None for v in lap):
            raise ValueError("laplacian branch must be complete or absent")
        for name, shape in expected.items():
            value = getattr(self, name)
            if value is not None and tuple(value.shape) != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {value.shape}")
        if self.use_identity and c_in != c_out:
            raise ValueError("identity branch requires C_in == C_out")

    @property
    def c_in(self) -> int:
        return self.main_weight.shape[1]

    @property
    def c_out(self) -> int:
        return self.main_weight.shape[0]

    @property
    def c_mid(self) -> int:
        return self.expand_weight.shape[0]

    @property
    def variant(self) -> str:
        return "encoder" if self.laplacian_scale is None else "decoder"

    def arrays(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name != "use_identity" and getattr(self, f.name) is not None}

    def param_count(self) -> int:
        return sum(a.size for a in self.arrays().values())


def random_tcb(c_in: int, c_out: int, variant: str = "encoder", rng=None, *, expansion: int = 2,
               use_identity: bool | None = None, dtype=np.float64) -> TcbParams:
    """Random block with fan-in scaled normal weights (for tests and init)."""
    rng = np.random.default_rng(rng)
    c_mid = expansion * c_out
    if use_identity is None:
        use_identity = c_in == c_out

    def normal(shape, fan_in):
        return (rng.standard_normal(shape) / np.sqrt(fan_in)).astype(dtype)

    p = dict(
        main_weight=normal((c_out, c_in, 3, 3), 9 * c_in), main_bias=normal((c_out,), 10),
        expand_weight=normal((c_mid, c_in), c_in), expand_bias=normal((c_mid,), 10),
        squeeze_weight=normal((c_out, c_mid, 3, 3), 9 * c_mid), squeeze_bias=normal((c_out,), 10),
        sobel_pre_weight=normal((c_out, c_in), c_in), sobel_pre_bias=normal((c_out,), 10),
        sobel_scale_x=normal((c_out,), 16), sobel_scale_y=normal((c_out,), 16),
        conv1x1_weight=normal((c_out, c_in), c_in), conv1x1_bias=normal((c_out,), 10),
    )
    if variant == "decoder":
        p.update(laplacian_pre_weight=normal((c_out, c_in), c_in),
                 laplacian_pre_bias=normal((c_out,), 10), laplacian_scale=normal((c_out,), 16))
    elif variant != "encoder":
        raise ValueError(f"unknown variant {variant!r}")
    return TcbParams(use_identity=use_identity, **p)


def tcb_forward(p: TcbParams, x: np.ndarray) -> np.ndarray:
    """Multi-branch evaluation; output dtype follows ``x``."""
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[0] != p.c_in:
        raise ops.ShapeError(f"block expects {p.c_in} input channels, got shape {x.shape}")
    xpad = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    out = ops.conv2d_3x3(x, p.main_weight, p.main_bias)
    out = out + ops.conv2d_3x3(ops.conv2d_1x1(xpad, p.expand_weight, p.expand_bias),
                               p.squeeze_weight, p.squeeze_bias, padding=0)
    sob = ops.conv2d_1x1(xpad, p.sobel_pre_weight, p.sobel_pre_bias)
    out = out + ops.depthwise_3x3(sob, SOBEL_X, p.sobel_scale_x, padding=0)
    out = out + ops.depthwise_3x3(sob, SOBEL_Y, p.sobel_scale_y, padding=0)
    if p.laplacian_scale is not None:
        lap = ops.conv2d_1x1(xpad, p.laplacian_pre_weight, p.laplacian_pre_bias)
        out = out + ops.depthwise_3x3(lap, LAPLACIAN, p.laplacian_scale, padding=0)
    out = out + ops.conv2d_1x1(x, p.conv1x1_weight, p.conv1x1_bias)
    if p.use_identity:
        out = out + x
    return out


def _derivative_kernel(pre_weight, pre_bias, pairs):
    """Fold ``scale_d * fixed_d`` over the 1x1 projection."""
    combo = sum(np.asarray(s, dtype=np.float64)[:, None, None] * k for s, k in pairs)  # (O, 3, 3)
    weight = np.asarray(pre_weight, dtype=np.float64)[:, :, None, None] * combo[:, None]
    bias = np.asarray(pre_bias, dtype=np.float64) * combo.sum(axis=(1, 2))
    return weight, bias


def tcb_fuse(p: TcbParams) -> Conv3x3:
    """Collapse all branches into a single equivalent 3x3 convolution (float64)."""
    f64 = lambda a: np.asarray(a, dtype=np.float64)  # noqa: E731
    weight = f64(p.main_weight).copy()
    bias = f64(p.main_bias).copy()

    squeeze = f64(p.squeeze_weight)
    weight += np.einsum("omyx,mi->oiyx", squeeze, f64(p.expand_weight))
    bias += squeeze.sum(axis=(2, 3)) @ f64(p.expand_bias) + f64(p.squeeze_bias)

    w, b = _derivative_kernel(p.sobel_pre_weight, p.sobel_pre_bias,
                              [(p.sobel_scale_x, SOBEL_X), (p.sobel_scale_y, SOBEL_Y)])
    weight += w
    bias += b
    if p.laplacian_scale is not None:
        w, b = _derivative_kernel(p.laplacian_pre_weight, p.laplacian_pre_bias,
                                  [(p.laplacian_scale, LAPLACIAN)])
        weight += w
        bias += b

    weight[:, :, 1, 1] += f64(p.conv1x1_weight)
    bias += f64(p.conv1x1_bias)
    if p.use_identity:
        idx = np.arange(p.c_out)
        weight[idx, idx, 1, 1] += 1.0
    return Conv3x3(weight, bias)


def conv3x3_forward(k: Conv3x3, x: np.ndarray) -> np.ndarray:
    return ops.conv2d_3x3(x, k.weight, k.bias)
