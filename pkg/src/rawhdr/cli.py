"""Command-line entry point: ``rawhdr <subcommand> ...``.

Every failure exits with status 2 and prints a single line
``rawhdr-error: <subcommand>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import losses, metrics
from .engine import kernels
from .engine.tensorio import read_tensor, write_tensor
from .pairs import PairConfig, build_quadruplet, synth_motion
from .raw import normalize_levels, read_pgm
from .repnet.graph import ArchConfig, build_dualunet, count_params_flops, fuse_model
from .repnet.weights import (check_weights, fuse_weights, graph_for_weights, init_weights,
                             load_manifest, save_manifest)
from .sensor import load_noise_config, noise_to_dict

DEFAULT_SEED = 42


class CliError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _json_float(x: float):
    return "inf" if x == float("inf") else x


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}")
    return p


def _arch(path: str | None, metadata: dict | None = None) -> ArchConfig:
    if path:
        return ArchConfig.from_dict(json.loads(_existing(path).read_text()))
    if metadata and "arch" in metadata:
        return ArchConfig.from_dict(metadata["arch"])
    return ArchConfig()


def _write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ------------------------------------------------------------


def cmd_synthesize(args) -> None:
    raw1, raw2 = _existing(args.raw1), _existing(args.raw2)
    models = load_noise_config(_existing(args.noise_config)) if args.noise_config else None
    cfg = PairConfig(ratio=args.ratio, seed=args.seed)
    if models:
        cfg = PairConfig(ratio=args.ratio, seed=args.seed, noise_long=models["long"],
                         noise_short=models["short"])
    if args.no_noise:
        cfg = cfg.noiseless()
    clean1 = normalize_levels(read_pgm(raw1))
    clean2 = normalize_levels(read_pgm(raw2))
    if clean1.shape != clean2.shape:
        raise CliError(f"raw dimensions differ: {clean1.shape} vs {clean2.shape}")
    sample = build_quadruplet(clean1, clean2, cfg)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "long.rten", sample.long.data)
    write_tensor(out / "short.rten", sample.short.data)
    write_tensor(out / "gt.rten", sample.gt.data)
    write_tensor(out / "mask.rten", sample.mask[None].astype(np.float32))
    manifest = {
        "ratio": sample.ratio,
        "seed": cfg.seed,
        "aligned": True,
        "noise": {
            "long": None if cfg.noise_long is None else noise_to_dict(cfg.noise_long),
            "short": None if cfg.noise_short is None else noise_to_dict(cfg.noise_short),
        },
        "motion": sample.motion.as_dict(),
        "saturated_long": sample.meta["saturated_long"],
        "files": {"long": "long.rten", "short": "short.rten", "gt": "gt.rten", "mask": "mask.rten"},
    }
    (out / "manifest.json").write_text(_dump(manifest))


def cmd_mask(args) -> None:
    long_ = read_tensor(_existing(args.long))
    moved, mask, spec = synth_motion(long_.astype(np.float64), args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "long_moved.rten", moved.data)
    write_tensor(out / "mask.rten", mask[None].astype(np.float32))
    (out / "motion.json").write_text(_dump({"seed": args.seed, "motion": spec.as_dict()}))


def cmd_init_weights(args) -> None:
    arch = _arch(args.arch)
    g = build_dualunet(arch, tcb=not args.plain)
    weights = init_weights(g, args.seed)
    variant = "plain" if args.plain else "tcb"
    save_manifest(args.output, weights, {"arch": arch.as_dict(), "variant": variant, "seed": args.seed})


def _cost_table(rows) -> str:
    lines = [f"{'model':<12}{'params':>12}{'GFLOPs':>12}"]
    for name, report in rows:
        lines.append(f"{name:<12}{report['params']:>12d}{report['flops'] / 1e9:>12.3f}")
    return "\n".join(lines) + "\n"


def cmd_fuse(args) -> None:
    weights, meta = load_manifest(_existing(args.weights))
    arch = _arch(args.arch, meta)
    if meta.get("variant") in ("fused", "plain") or not any(".main_weight" in k for k in weights):
        raise CliError("weights are already fused (no TCB tensors); nothing to do")
    g = build_dualunet(arch, tcb=True)
    check_weights(g, weights)
    gf = fuse_model(g)
    fused = fuse_weights(g, weights)
    save_manifest(args.output, fused, {**meta, "arch": arch.as_dict(), "variant": "fused"})
    _, h, w = args.dims
    sys.stdout.write(_cost_table([("tcb", count_params_flops(g, h, w)),
                                  ("fused", count_params_flops(gf, h, w))]))


def cmd_infer(args) -> None:
    weights, meta = load_manifest(_existing(args.weights))
    arch = _arch(args.arch, meta)
    g = graph_for_weights(weights, arch)
    long_ = read_tensor(_existing(args.long))
    short = read_tensor(_existing(args.short))
    from .engine.executor import forward

    out = forward(g, weights, short, long_)
    write_tensor(args.output, out)


def cmd_eval(args) -> None:
    paths = args.pairs
    if len(paths) % 2:
        raise CliError("eval expects OUT GT pairs")
    mask = read_tensor(_existing(args.mask))[0] if args.mask else None
    weights = losses.LossWeights.from_json(_existing(args.loss_weights)) if args.loss_weights else losses.LossWeights()
    reports = []
    for out_path, gt_path in zip(paths[0::2], paths[1::2]):
        out = read_tensor(_existing(out_path)).astype(np.float64)
        gt = read_tensor(_existing(gt_path)).astype(np.float64)
        if out.shape != gt.shape:
            raise CliError(f"{out_path} and {gt_path} differ in shape: {out.shape} vs {gt.shape}")
        m = metrics.evaluate(out, gt, args.peak).as_dict()
        entry = {"out": out_path, "gt": gt_path, "metrics": m}
        if args.losses:
            entry["losses"] = losses.total_loss(out, gt, mask, weights).as_dict()
        reports.append(entry)
    mean = {k: float(np.mean([r["metrics"][k] for r in reports])) for k in reports[0]["metrics"]}
    for r in reports:
        r["metrics"]["psnr"] = _json_float(r["metrics"]["psnr"])
    mean["psnr"] = _json_float(mean["psnr"])
    result = {"pairs": reports, "mean": mean}
    if args.losses:
        result["mean_losses"] = {k: float(np.mean([r["losses"][k] for r in reports]))
                                 for k in reports[0]["losses"]}
        result["loss_weights"] = asdict(weights)
    _write_text(args.output, _dump(result))


def cmd_bench(args) -> None:
    from .engine.executor import benchmark

    arch = _arch(args.arch)
    g = build_dualunet(arch, tcb=True)
    w = init_weights(g, args.seed)
    gf, wf = fuse_model(g), fuse_weights(g, w)
    backends = sorted(kernels.BACKENDS) if args.backend == "all" else [args.backend or kernels.backend_name()]
    runs = [benchmark(g, w, gf, wf, tuple(args.dims), args.repeats, args.warmup, args.seed, b)
            for b in backends]
    _write_text(args.output, _dump(runs[0] if len(runs) == 1 else {"runs": runs}))


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rawhdr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="build a {long, short, mask, gt} quadruplet from two clean raws")
    s.add_argument("raw1", help="first clean raw (PGM with .json sidecar), source of the long exposure")
    s.add_argument("raw2", help="second clean raw, source of the short exposure and ground truth")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--ratio", type=int, default=None, help="fixed exposure ratio (default: draw from 4/8/16)")
    s.add_argument("--noise-config", help="JSON noise coefficients {long: {...}, short: {...}}")
    s.add_argument("--no-noise", action="store_true")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("mask", help="apply synthetic motion to a long-exposure tensor")
    s.add_argument("long", help="RTEN (4, h, w) long exposure")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("init-weights", help="write reproducible random weights")
    s.add_argument("-o", "--output", required=True, help="manifest path (.json); blob goes next to it")
    s.add_argument("--arch", help="ArchConfig JSON")
    s.add_argument("--plain", action="store_true", help="plain DualUNet instead of the TCB variant")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_init_weights)

    s = sub.add_parser("fuse", help="fold every TCB into a single 3x3 convolution")
    s.add_argument("weights")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--arch")
    s.add_argument("--dims", type=int, nargs=3, default=(4, 256, 256), metavar=("C", "H", "W"),
                   help="packed input dims for the FLOP table")
    s.set_defaults(func=cmd_fuse)

    s = sub.add_parser("infer", help="run the network on packed long/short tensors")
    s.add_argument("--weights", required=True)
    s.add_argument("--arch")
    s.add_argument("--long", required=True)
    s.add_argument("--short", required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("eval", help="metrics (and optionally losses) for OUT GT pairs")
    s.add_argument("pairs", nargs="+", metavar="OUT GT")
    s.add_argument("--mask", help="RTEN (1, h, w) binary motion mask")
    s.add_argument("--losses", action="store_true", help="add the loss report")
    s.add_argument("--loss-weights", help="JSON {alpha, beta, gamma, eta_w}")
    s.add_argument("--peak", type=float, default=1.0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="median latency of multi-branch vs fused graphs")
    s.add_argument("--arch")
    s.add_argument("--dims", type=int, nargs=3, default=(4, 512, 512), metavar=("C", "H", "W"))
    s.add_argument("--repeats", type=int, default=20)
    s.add_argument("--warmup", type=int, default=1)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--backend", choices=[*sorted(kernels.BACKENDS), "all"])
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"rawhdr-error: {args.command}: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
