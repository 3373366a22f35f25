"""Command-line interface.

Subcommands: resize, warp, flow-warp, bench, warp-bench.
Exit codes: 0 success, 2 misuse, 3 I/O error, 4 format error.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import kernels
from .bench import bench_run, format_table, parse_tasks, warp_bench_run, write_csv
from .errors import DecodeError, FormatError, LerfError
from .geometry import Flow, Homography, Scale, load_flow, load_homography
from .image import ImageBuffer, load_image, save_image
from .lut import load_lut_bank
from .resample import (
    ResampleJob,
    aa_sigma_for_scale,
    antialias_preproc,
    identity_preproc,
    enhancer_preproc,
    resample,
)

KERNEL_NAMES = {
    "nearest": kernels.nearest,
    "bilinear": kernels.linear,
    "bicubic": kernels.keys_cubic,
    "lanczos2": lambda: kernels.lanczos(2),
    "lanczos3": lambda: kernels.lanczos(3),
    "lerf-l": kernels.amplified_linear,
    "lerf-g": kernels.aniso_gaussian,
}


def _kernel_and_bank(args):
    kernel = KERNEL_NAMES[args.kernel]()
    bank = None
    if getattr(args, "lut", None):
        bank = load_lut_bank(args.lut)
    hyper_map = None
    if getattr(args, "hyper_map", None):
        try:
            hyper_map = np.load(args.hyper_map)
        except (OSError, ValueError) as e:
            raise DecodeError(f"cannot read hyper map {args.hyper_map}: {e}") from e
    return kernel, bank, hyper_map


def _preproc_for(args, kernel, bank, scale=None):
    if getattr(args, "aa", False):
        if scale is not None:
            sig = (aa_sigma_for_scale(scale[0]), aa_sigma_for_scale(scale[1]))
            if min(sig) <= 0:
                return identity_preproc()
            return antialias_preproc(sig)
        return antialias_preproc(getattr(args, "aa_sigma", 1.0))
    if kernel.is_adaptive and bank is not None and bank.has_enhancer:
        return enhancer_preproc()
    return identity_preproc()


def _save_mask(mask, path):
    save_image(ImageBuffer(mask.astype(np.float64)), path)


def cmd_resize(args):
    src = load_image(args.infile)
    r_h = args.scale
    r_w = args.scale_w if args.scale_w is not None else args.scale
    kernel, bank, hyper_map = _kernel_and_bank(args)
    tgt = (int(math.floor(src.height * r_h)), int(math.floor(src.width * r_w)))
    preproc = _preproc_for(args, kernel, bank, scale=(r_h, r_w))
    job = ResampleJob(src, Scale(r_h, r_w), kernel, tgt,
                      preproc=preproc, bank=bank, hyper_map=hyper_map)
    res = resample(job)
    save_image(res.image, args.outfile)
    return 0


def cmd_warp(args):
    src = load_image(args.infile)
    m = load_homography(args.matrix)
    kernel, bank, hyper_map = _kernel_and_bank(args)
    tgt = _parse_size(args.out_size) if args.out_size else (src.height, src.width)
    preproc = _preproc_for(args, kernel, bank)
    job = ResampleJob(src, Homography(m, target_to_source=not args.forward),
                      kernel, tgt, preproc=preproc, bank=bank, hyper_map=hyper_map)
    res = resample(job)
    save_image(res.image, args.outfile)
    if args.emit_mask:
        _save_mask(res.valid, args.emit_mask)
    return 0


def cmd_flow_warp(args):
    src = load_image(args.infile)
    flow = load_flow(args.flow)
    kernel, bank, hyper_map = _kernel_and_bank(args)
    tgt = flow.field.shape[:2]
    preproc = _preproc_for(args, kernel, bank)
    job = ResampleJob(src, flow, kernel, tgt,
                      preproc=preproc, bank=bank, hyper_map=hyper_map)
    res = resample(job)
    save_image(res.image, args.outfile)
    if args.emit_mask:
        _save_mask(res.valid, args.emit_mask)
    return 0


def cmd_bench(args):
    kernel, bank, _ = _kernel_and_bank(args)
    tasks = parse_tasks(args.tasks)
    report = bench_run(args.dataset, tasks, kernel, bank=bank, shave=args.shave)
    print(format_table(report))
    if args.csv:
        write_csv(report, args.csv)
    return 0


def cmd_warp_bench(args):
    kernel, bank, _ = _kernel_and_bank(args)
    report = warp_bench_run(args.dataset, args.matrices, kernel, bank=bank)
    print(format_table(report))
    if args.csv:
        write_csv(report, args.csv)
    return 0


def _parse_size(text):
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise FormatError(f"bad size {text!r}, expected HxW")
    return int(parts[0]), int(parts[1])


def _add_kernel_args(p, with_map=True):
    p.add_argument("--kernel", choices=sorted(KERNEL_NAMES), default="bicubic")
    p.add_argument("--lut", help="LUT bank file for lerf-l / lerf-g kernels")
    if with_map:
        p.add_argument("--hyper-map", dest="hyper_map",
                       help=".npy (H, W, C) explicit hyper-parameter map")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lerf", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("resize", help="arbitrary-scale resize")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--scale", type=float, required=True, help="height factor")
    p.add_argument("--scale-w", type=float, default=None, help="width factor (default: --scale)")
    _add_kernel_args(p)
    p.add_argument("--aa", action="store_true",
                   help="Gaussian anti-alias pre-filter (schedule 0.5/r - 0.5)")
    p.set_defaults(func=cmd_resize)

    p = sub.add_parser("warp", help="homographic warp (backward mapping)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--matrix", required=True, help="9 reals, row-major, target->source")
    p.add_argument("--forward", action="store_true",
                   help="matrix is source->target; invert it")
    p.add_argument("--out-size", default=None, help="HxW (default: input size)")
    p.add_argument("--emit-mask", default=None, help="write validity mask PNG")
    _add_kernel_args(p)
    p.set_defaults(func=cmd_warp, aa=False)

    p = sub.add_parser("flow-warp", help="warp along a Middlebury .flo field")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--flow", required=True)
    p.add_argument("--emit-mask", default=None)
    _add_kernel_args(p)
    p.set_defaults(func=cmd_flow_warp, aa=False)

    p = sub.add_parser("bench", help="upsampling benchmark over a dataset dir")
    p.add_argument("--dataset", required=True)
    p.add_argument("--tasks", required=True, help='e.g. "2.0x2.0,1.5x2.0,3.0x3.0"')
    p.add_argument("--csv", default=None)
    p.add_argument("--shave", type=int, default=None)
    _add_kernel_args(p, with_map=False)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("warp-bench", help="round-trip homography benchmark")
    p.add_argument("--dataset", required=True)
    p.add_argument("--matrices", required=True, help="dir of per-image .txt matrices")
    p.add_argument("--csv", default=None)
    _add_kernel_args(p, with_map=False)
    p.set_defaults(func=cmd_warp_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except LerfError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
