"""Compare the compiled and numpy convolution backends.

    python benchmarks/bench_backends.py [--dims C H W] [--repeats N] [-o report.json]

Reports the median time of a single 3x3 convolution per backend, then the
multi-branch vs fused network latency per backend.
"""

import argparse
import json
import statistics
import sys
import time

import numpy as np

from rawhdr.engine import BACKENDS, backend_name, ops, set_backend
from rawhdr.engine.executor import benchmark
from rawhdr.repnet import build_dualunet, fuse_model
from rawhdr.repnet.weights import fuse_weights, init_weights


def time_conv(channels: int, size: int, repeats: int) -> float:
    rng = np.random.default_rng(0)
    x = rng.standard_normal((channels, size, size)).astype(np.float32)
    w = rng.standard_normal((channels, channels, 3, 3)).astype(np.float32)
    ops.conv2d_3x3(x, w)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        ops.conv2d_3x3(x, w)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs=3, default=(4, 512, 512))
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("-o", "--output")
    args = p.parse_args(argv)

    g = build_dualunet(tcb=True)
    w = init_weights(g, 0)
    gf, wf = fuse_model(g), fuse_weights(g, w)
    default = backend_name()
    report = {"default_backend": default, "conv": {}, "network": {}}
    for name in sorted(BACKENDS):
        set_backend(name)
        report["conv"][name] = {f"{c}x{s}x{s}": time_conv(c, s, args.repeats) for c, s in ((16, 256), (64, 64))}
        run = benchmark(g, w, gf, wf, tuple(args.dims), args.repeats, backend=name)
        report["network"][name] = {"multibranch_s": run["multibranch"]["median_s"],
                                   "fused_s": run["fused"]["median_s"], "speedup": run["speedup"]}
    set_backend(default)

    print(f"{'backend':<10}{'conv 16x256²':>14}{'conv 64x64²':>14}{'multi':>10}{'fused':>10}{'speedup':>9}")
    for name in sorted(BACKENDS):
        c, n = report["conv"][name], report["network"][name]
        print(f"{name:<10}{c['16x256x256'] * 1e3:>12.2f}ms{c['64x64x64'] * 1e3:>12.2f}ms"
              f"{n['multibranch_s']:>9.3f}s{n['fused_s']:>9.3f}s{n['speedup']:>8.2f}x")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
