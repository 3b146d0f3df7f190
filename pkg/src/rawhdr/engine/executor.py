"""Graph execution and latency benchmarking."""

from __future__ import annotations

import contextlib
import os
import statistics
import time

import numpy as np

from ..repnet.graph import ModelGraph, tcb_from_weights
from ..repnet.tcb import tcb_forward
from ..repnet.weights import check_weights
from . import kernels, ops


def thread_limit():
    """Cap BLAS threads at ``RAWHDR_THREADS`` when it is set."""
    n = os.environ.get("RAWHDR_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def forward(g: ModelGraph, weights: dict, short, long, dtype=np.float32) -> np.ndarray:
    """Execute ``g`` in node order on packed ``(C, H, W)`` inputs."""
    check_weights(g, weights)
    stride = g.stride
    env: dict[str, np.ndarray] = {}
    feeds = {"short": np.asarray(short, dtype=dtype), "long": np.asarray(long, dtype=dtype)}
    with thread_limit():
        for n in g.nodes:
            args = [env[i] for i in n.inputs]
            if n.kind == "input":
                x = feeds[n.name]
                if x.ndim != 3 or x.shape[0] != n.attrs["channels"]:
                    raise ops.ShapeError(f"input {n.name}: expected {n.attrs['channels']} channels, "
                                         f"got shape {x.shape}")
                h, w = x.shape[1:]
                if h % stride or w % stride:
                    raise ops.ShapeError(f"input {n.name}: {h}x{w} not divisible by the network stride")
                env[n.name] = x
            elif n.kind == "conv3x3":
                env[n.name] = ops.conv2d_3x3(args[0], weights[f"{n.name}.weight"], weights[f"{n.name}.bias"])
            elif n.kind == "tcb":
                env[n.name] = tcb_forward(tcb_from_weights(n, weights), args[0])
            elif n.kind == "relu":
                env[n.name] = ops.relu(args[0])
            elif n.kind == "pixel_unshuffle2":
                env[n.name] = ops.pixel_unshuffle2(args[0])
            elif n.kind == "pixel_shuffle2":
                env[n.name] = ops.pixel_shuffle2(args[0])
            elif n.kind == "concat":
                env[n.name] = ops.concat(*args)
            elif n.kind == "add":
                env[n.name] = ops.add(*args)
            elif n.kind == "output":
                env[n.name] = args[0]
    return env[g.output]


def _time_forward(g, weights, short, long, repeats: int, warmup: int) -> list[float]:
    for _ in range(warmup):
        forward(g, weights, short, long)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        forward(g, weights, short, long)
        samples.append(time.perf_counter() - t0)
    return samples


def benchmark(g_multibranch: ModelGraph, w_multibranch: dict, g_fused: ModelGraph, w_fused: dict,
              dims=(4, 512, 512), repeats: int = 20, warmup: int = 1, seed: int = 0,
              backend: str | None = None) -> dict:
    """Median wall time of both graph variants on random inputs of ``dims``."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    rng = np.random.default_rng(seed)
    short = rng.random(dims, dtype=np.float32)
    long = rng.random(dims, dtype=np.float32)
    previous = kernels.backend_name()
    if backend is not None:
        kernels.set_backend(backend)
    try:
        multi = _time_forward(g_multibranch, w_multibranch, short, long, repeats, warmup)
        fused = _time_forward(g_fused, w_fused, short, long, repeats, warmup)
    finally:
        kernels.set_backend(previous)
    m_med, f_med = statistics.median(multi), statistics.median(fused)
    return {
        "backend": backend or previous,
        "dims": list(dims),
        "repeats": repeats,
        "warmup": warmup,
        "multibranch": {"median_s": m_med, "samples_s": multi},
        "fused": {"median_s": f_med, "samples_s": fused},
        "speedup": m_med / f_med if f_med > 0 else float("inf"),
    }
