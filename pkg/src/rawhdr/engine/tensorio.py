"""RTEN tensor files.

Layout (all integers little-endian): magic ``b"RTEN"``, ``u32`` version,
``u32`` ndim, ``u32[ndim]`` dims, then the payload as little-endian IEEE-754
float32 in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"RTEN"
VERSION = 1


def write_tensor(path, array) -> None:
    a = np.ascontiguousarray(array, dtype="<f4")
    header = MAGIC + struct.pack(f"<II{a.ndim}I", VERSION, a.ndim, *a.shape)
    Path(path).write_bytes(header + a.tobytes())


def read_tensor(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if buf[:4] != MAGIC:
        raise ValueError(f"{path}: not an RTEN file")
    version, ndim = struct.unpack_from("<II", buf, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported RTEN version {version}")
    dims = struct.unpack_from(f"<{ndim}I", buf, 12)
    offset = 12 + 4 * ndim
    count = int(np.prod(dims)) if ndim else 1
    expected = offset + 4 * count
    if len(buf) != expected:
        raise ValueError(f"{path}: payload is {len(buf) - offset} bytes, expected {4 * count}")
    return np.frombuffer(buf, dtype="<f4", count=count, offset=offset).reshape(dims).astype(np.float32)
