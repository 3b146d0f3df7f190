"""Bayer mosaic containers, RGGB packing, level normalization and color conversions.

Packed raws are stored as a ``(4, h, w)`` float array with planes in the
canonical ``[R, G1, G2, B]`` order, whatever the sensor pattern was.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PATTERNS = ("RGGB", "BGGR", "GRBG", "GBRG")

# Linear sRGB (D65) -> CIE XYZ, IEC 61966-2-1.
SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
# Reference white as the image of RGB (1, 1, 1) so neutrals map to a* = b* = 0.
D65_WHITE = SRGB_TO_XYZ.sum(axis=1)

_LAB_EPS = (6.0 / 29.0) ** 3
_LAB_KAPPA = (29.0 / 6.0) ** 2 / 3.0


class DimensionError(ValueError):
    """Raised when image dimensions violate an operation's requirements."""


def _offsets(pattern: str) -> list[tuple[int, int]]:
    """Return the (row, col) offsets of R, G1, G2, B inside a 2x2 cell."""
    if pattern not in PATTERNS:
        raise ValueError(f"unknown Bayer pattern {pattern!r}")
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    red = cells[pattern.index("R")]
    blue = cells[pattern.index("B")]
    greens = [cells[i] for i, ch in enumerate(pattern) if ch == "G"]
    return [red, greens[0], greens[1], blue]


@dataclass(frozen=True)
class BayerImage:
    data: np.ndarray
    pattern: str = "RGGB"
    black_level: float = 0.0
    white_level: float = 4095.0
    bit_depth: int = 12

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise DimensionError(f"mosaic must be 2-D, got shape {data.shape}")
        if data.shape[0] % 2 or data.shape[1] % 2:
            raise DimensionError(f"mosaic dimensions must be even, got {data.shape}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown Bayer pattern {self.pattern!r}")
        if not self.black_level < self.white_level:
            raise ValueError("black_level must be below white_level")
        if data.size and data.max() > 2**self.bit_depth - 1:
            raise ValueError(f"sample exceeds {self.bit_depth}-bit range")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class PackedRaw:
    """Four half-resolution planes ``[R, G1, G2, B]``."""

    data: np.ndarray
    exposure_scale: float = 1.0

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[0] != 4:
            raise DimensionError(f"packed raw must have shape (4, h, w), got {data.shape}")
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass(frozen=True)
class RGBImage:
    data: np.ndarray  # (3, h, w), scene-linear


@dataclass(frozen=True)
class LabImage:
    data: np.ndarray  # (3, h, w): L*, a*, b*


def pack_bayer(raw: BayerImage) -> PackedRaw:
    planes = [raw.data[dy::2, dx::2] for dy, dx in _offsets(raw.pattern)]
    return PackedRaw(np.stack(planes))


def unpack_bayer(packed: PackedRaw, pattern: str = "RGGB", *, black_level: float = 0.0,
                 white_level: float = 4095.0, bit_depth: int = 12) -> BayerImage:
    data = np.asarray(packed)
    _, h, w = data.shape
    mosaic = np.empty((2 * h, 2 * w), dtype=data.dtype)
    for plane, (dy, dx) in zip(data, _offsets(pattern)):
        mosaic[dy::2, dx::2] = plane
    return BayerImage(mosaic, pattern, black_level, white_level, bit_depth)


def normalize_levels(raw: BayerImage) -> PackedRaw:
    """Subtract the black level and scale so that the white level maps to 1.

    Values below black are clamped to 0; nothing is clamped above 1.
    """
    packed = pack_bayer(raw).data.astype(np.float64)
    scaled = (packed - raw.black_level) / (raw.white_level - raw.black_level)
    return PackedRaw(np.maximum(scaled, 0.0), exposure_scale=1.0)


def naive_rgb(packed) -> RGBImage:
    data = np.asarray(packed, dtype=np.float64)
    r, g1, g2, b = data
    return RGBImage(np.stack([r, (g1 + g2) / 2.0, b]))


def rgb_to_lab(rgb) -> LabImage:
    """Scene-linear sRGB to CIE L*a*b* (D65). Inputs are clipped to [0, 1] first."""
    data = rgb.data if isinstance(rgb, RGBImage) else np.asarray(rgb)
    data = np.clip(np.asarray(data, dtype=np.float64), 0.0, 1.0)
    xyz = np.tensordot(SRGB_TO_XYZ, data, axes=1) / D65_WHITE[:, None, None]
    f = np.where(xyz > _LAB_EPS, np.cbrt(xyz), _LAB_KAPPA * xyz + 4.0 / 29.0)
    L = 116.0 * f[1] - 16.0
    a = 500.0 * (f[0] - f[1])
    b = 200.0 * (f[1] - f[2])
    # cbrt branch and linear branch meet at L=0 only approximately for pure black
    L = np.where(xyz[1] == 0.0, 0.0, L)
    return LabImage(np.stack([L, a, b]))


# --- Netpbm PGM (P5) + JSON sidecar ----------------------------------------


def _sidecar(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def write_pgm(path, raw: BayerImage) -> None:
    """Write a mosaic as binary PGM plus a ``<name>.pgm.json`` sidecar."""
    path = Path(path)
    maxval = 2**raw.bit_depth - 1
    data = np.asarray(raw.data)
    if maxval < 256:
        payload = data.astype(">u1").tobytes()
    else:
        payload = data.astype(">u2").tobytes()
    header = f"P5\n{raw.width} {raw.height}\n{maxval}\n".encode("ascii")
    path.write_bytes(header + payload)
    meta = {
        "pattern": raw.pattern,
        "black_level": raw.black_level,
        "white_level": raw.white_level,
        "bit_depth": raw.bit_depth,
    }
    _sidecar(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _read_tokens(buf: bytes, count: int) -> tuple[list[int], int]:
    tokens: list[int] = []
    pos = 2  # after magic
    while len(tokens) < count:
        while buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while buf[pos:pos + 1] not in (b"\n", b"\r", b""):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(buf[start:pos]))
    return tokens, pos + 1  # single whitespace before raster


def read_pgm(path) -> BayerImage:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM file")
    (width, height, maxval), offset = _read_tokens(buf, 3)
    dtype = ">u1" if maxval < 256 else ">u2"
    data = np.frombuffer(buf, dtype=dtype, count=width * height, offset=offset)
    data = data.reshape(height, width).astype(np.uint16)
    side = _sidecar(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    bit_depth = int(meta.get("bit_depth", int(maxval).bit_length()))
    return BayerImage(
        data,
        pattern=meta.get("pattern", "RGGB"),
        black_level=meta.get("black_level", 0.0),
        white_level=meta.get("white_level", float(maxval)),
        bit_depth=bit_depth,
    )
