"""Weight manifests: a JSON header plus one little-endian float32 blob.

Header::

    {"format": "rawhdr-weights", "version": 1, "blob": "<file>.bin",
     "metadata": {...},
     "tensors": [{"name": ..., "shape": [...], "dtype": "float32", "offset": <bytes>}, ...]}

``blob`` is resolved relative to the header file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import ArchConfig, ModelGraph, build_dualunet, param_shapes, tcb_from_weights
from .tcb import tcb_fuse

FORMAT = "rawhdr-weights"
VERSION = 1


def save_manifest(path, weights: dict[str, np.ndarray], metadata: dict | None = None) -> None:
    path = Path(path)
    blob_path = path.with_suffix(".bin")
    entries = []
    chunks = []
    offset = 0
    for name, value in weights.items():
        data = np.ascontiguousarray(value, dtype="<f4")
        entries.append({"name": name, "shape": list(data.shape), "dtype": "float32", "offset": offset})
        chunks.append(data.tobytes())
        offset += data.nbytes
    header = {"format": FORMAT, "version": VERSION, "blob": blob_path.name,
              "metadata": metadata or {}, "tensors": entries}
    blob_path.write_bytes(b"".join(chunks))
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")


def load_manifest(path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} manifest")
    if header.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported manifest version {header.get('version')}")
    blob = (path.parent / header["blob"]).read_bytes()
    weights = {}
    for entry in header["tensors"]:
        if entry["dtype"] != "float32":
            raise ValueError(f"{entry['name']}: unsupported dtype {entry['dtype']}")
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=entry["offset"])
        weights[entry["name"]] = arr.reshape(entry["shape"]).astype(np.float32)
    return weights, header.get("metadata", {})


def init_weights(g: ModelGraph, seed: int = 0) -> dict[str, np.ndarray]:
    """Reproducible random weights: fan-in scaled normals, PCG64 seeded by ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = {}
    for name, shape in param_shapes(g).items():
        if name.endswith(("scale_x", "scale_y", "laplacian_scale")):
            value = 0.1 * rng.standard_normal(shape)
        elif len(shape) == 1:
            value = 0.05 * rng.standard_normal(shape)
        else:
            value = rng.standard_normal(shape) * np.sqrt(1.0 / np.prod(shape[1:]))
        out[name] = value.astype(np.float32)
    return out


def check_weights(g: ModelGraph, weights: dict) -> None:
    expected = param_shapes(g)
    missing = [k for k in expected if k not in weights]
    if missing:
        raise KeyError(f"missing weights: {missing[:5]}{' ...' if len(missing) > 5 else ''}")
    for name, shape in expected.items():
        if tuple(np.shape(weights[name])) != shape:
            raise ValueError(f"{name}: expected shape {shape}, got {np.shape(weights[name])}")


def fuse_weights(g: ModelGraph, weights: dict, dtype=np.float32) -> dict[str, np.ndarray]:
    """Weights for ``fuse_model(g)``: every TCB becomes ``<node>.weight/.bias``."""
    check_weights(g, weights)
    out = {}
    for n in g.by_kind("conv3x3", "tcb"):
        if n.kind == "tcb":
            k = tcb_fuse(tcb_from_weights(n, weights))
            out[f"{n.name}.weight"] = k.weight.astype(dtype)
            out[f"{n.name}.bias"] = k.bias.astype(dtype)
        else:
            out[f"{n.name}.weight"] = np.asarray(weights[f"{n.name}.weight"], dtype=dtype)
            out[f"{n.name}.bias"] = np.asarray(weights[f"{n.name}.bias"], dtype=dtype)
    return out


def graph_for_weights(weights: dict, arch: ArchConfig) -> ModelGraph:
    """Pick the TCB or plain graph matching the tensor names present."""
    tcb = any(".main_weight" in k for k in weights)
    return build_dualunet(arch, tcb=tcb)
