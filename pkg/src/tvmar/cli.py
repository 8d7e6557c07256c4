"""Command-line pipeline: phantom -> project -> degrade -> reconstruct -> psnr.

Every run writes a key=value manifest next to its outputs.  Exit codes:
0 success, 2 usage/configuration error, 3 numeric divergence, 4 I/O or file
format error.
"""

import argparse
import math
import os
import sys
import time

import numpy as np

from . import io as gridio
from .degrade import NoiseSpec, add_noise, cap_sinogram
from .metrics import fbp_baseline, psnr
from .phantom import MetalInsert, add_metal, default_metal_insert, shepp_logan
from .radon import Geometry, Sinogram, project
from .solver import ConfigurationError, DivergenceError, SolverConfig, solve

CP_MODES = {"cp-unconstrained": "unconstrained", "cp-soft": "soft",
            "cp-hard": "hard"}


def _int_pair(text):
    try:
        a, b = (int(part) for part in text.split(","))
    except Exception:
        raise argparse.ArgumentTypeError(
            f"expected two comma-separated integers, got {text!r}")
    return a, b


def _float_pair(text):
    try:
        a, b = (float(part) for part in text.split(","))
    except Exception:
        raise argparse.ArgumentTypeError(
            f"expected two comma-separated numbers, got {text!r}")
    return a, b


def _default_threads():
    env = os.environ.get("MAR_THREADS")
    if env is not None:
        return int(env)
    return os.cpu_count() or 1


def _write_manifest(path, command, params, timings, metrics):
    """Stable key=value text file; only time_* keys vary between runs."""
    with open(path, "w") as fh:
        fh.write(f"command = {command}\n")
        for key in sorted(params):
            fh.write(f"param.{key} = {params[key]}\n")
        for key in sorted(metrics):
            fh.write(f"metric.{key} = {metrics[key]}\n")
        for key in sorted(timings):
            fh.write(f"time.{key} = {timings[key]:.6f}\n")


def _load_image(path):
    return gridio.grid_to_image(gridio.read_grid(path))


def _load_sinogram(path):
    return gridio.grid_to_sinogram(gridio.read_grid(path))


def cmd_phantom(args):
    t0 = time.perf_counter()
    img = shepp_logan(args.size, args.size)
    if args.metal_value > 0:
        rows, cols = args.metal_size
        if args.metal_pos is None:
            insert = default_metal_insert(args.size, args.size, rows, cols,
                                          args.metal_value)
        else:
            insert = MetalInsert(args.metal_pos[0], args.metal_pos[1],
                                 rows, cols, args.metal_value)
        img = add_metal(img, insert)
    t1 = time.perf_counter()
    gridio.write_grid(args.out, gridio.image_to_grid(img))
    t2 = time.perf_counter()
    _write_manifest(args.out + ".manifest.txt", "phantom",
                    {"size": args.size, "metal_pos": args.metal_pos,
                     "metal_size": args.metal_size,
                     "metal_value": args.metal_value, "out": args.out},
                    {"compute_s": t1 - t0, "save_s": t2 - t1},
                    {"max_value": f"{img.values.max():.17g}"})
    return 0


def cmd_project(args):
    t0 = time.perf_counter()
    img = _load_image(args.infile)
    geom = Geometry.uniform(args.angles, n_bins=args.bins,
                            img_shape=img.shape)
    t1 = time.perf_counter()
    sino = project(img, geom)
    t2 = time.perf_counter()
    gridio.write_grid(args.out, gridio.sinogram_to_grid(sino))
    t3 = time.perf_counter()
    _write_manifest(args.out + ".manifest.txt", "project",
                    {"in": args.infile, "angles": args.angles,
                     "bins": geom.n_bins, "out": args.out},
                    {"load_s": t1 - t0, "compute_s": t2 - t1,
                     "save_s": t3 - t2},
                    {"max_value": f"{sino.values.max():.17g}"})
    return 0


def cmd_cap(args):
    t0 = time.perf_counter()
    sino = _load_sinogram(args.infile)
    capped, mask = cap_sinogram(sino, args.cap)
    t1 = time.perf_counter()
    gridio.write_grid(args.out, gridio.sinogram_to_grid(capped, cap=args.cap))
    if args.mask_out:
        mask_grid = gridio.GridFile(kind=gridio.KIND_SINOGRAM,
                                    values=mask.astype(np.float64),
                                    h=sino.geometry.bin_spacing,
                                    cap=args.cap,
                                    angle0=float(sino.geometry.angles[0]),
                                    angle_step=float(sino.geometry.angles[1]
                                                     - sino.geometry.angles[0])
                                    if sino.geometry.n_angles > 1 else math.pi)
        gridio.write_grid(args.mask_out, mask_grid)
    t2 = time.perf_counter()
    _write_manifest(args.out + ".manifest.txt", "cap",
                    {"in": args.infile, "cap": args.cap, "out": args.out,
                     "mask_out": args.mask_out},
                    {"compute_s": t1 - t0, "save_s": t2 - t1},
                    {"capped_entries": int(mask.sum())})
    return 0


def cmd_noise(args):
    t0 = time.perf_counter()
    sino = _load_sinogram(args.infile)
    noisy = add_noise(sino, NoiseSpec(relative_level=args.level,
                                      rng_seed=args.seed,
                                      reference=args.level_ref))
    t1 = time.perf_counter()
    gridio.write_grid(args.out, gridio.sinogram_to_grid(noisy))
    t2 = time.perf_counter()
    _write_manifest(args.out + ".manifest.txt", "noise",
                    {"in": args.infile, "level": args.level,
                     "seed": args.seed, "level_ref": args.level_ref,
                     "out": args.out},
                    {"compute_s": t1 - t0, "save_s": t2 - t1}, {})
    return 0


def _resolve_lambda(args, parser):
    if args.log_lambda is not None and args.lam is not None:
        parser.error("--lambda and --log-lambda are mutually exclusive")
    if args.log_lambda is not None:
        return 10.0 ** args.log_lambda
    return args.lam


def _resolve_cap(args, header_cap):
    if args.cap is not None:
        return args.cap
    if math.isfinite(header_cap):
        return header_cap
    return None


def cmd_reconstruct(args, parser):
    os.makedirs(args.out_dir, exist_ok=True)
    t0 = time.perf_counter()
    grid = gridio.read_grid(args.infile)
    sino = gridio.grid_to_sinogram(grid)
    ground_truth = _load_image(args.ground_truth) if args.ground_truth else None
    if ground_truth is not None:
        img_shape = ground_truth.shape
    elif args.size is not None:
        img_shape = (args.size, args.size)
    else:
        parser.error("--size or --ground-truth is required to fix the "
                     "reconstruction grid")
    t1 = time.perf_counter()

    lam = _resolve_lambda(args, parser)
    cap = _resolve_cap(args, grid.cap)
    metrics = {}
    diagnostics = None
    iters_done = 0

    if args.mode in ("fbp", "bp"):
        filt = "ram-lak" if args.mode == "fbp" else "none"
        recon = fbp_baseline(sino, img_shape, filter=filt)
    else:
        mode = CP_MODES[args.mode]
        if mode == "soft" and lam is None:
            parser.error("--lambda (or --log-lambda) is required for cp-soft")
        if mode in ("soft", "hard") and cap is None:
            parser.error("--cap is required for cp-soft/cp-hard (none found "
                         "in the sinogram header)")
        if args.mask and mode in ("soft", "hard"):
            mask = gridio.read_grid(args.mask).values != 0.0
            if mask.shape != sino.values.shape:
                parser.error("mask file shape does not match the sinogram")
            values = np.where(mask, cap, sino.values)
            if np.any(values[~mask] >= cap):
                parser.error("mask file is inconsistent with the data: "
                             "entries >= cap outside the mask")
            sino = Sinogram(values, sino.geometry)
        snapshot = args.snapshot_every
        if snapshot == 0:
            snapshot = max(1, args.iters // 100)
        cfg = SolverConfig(mode=mode,
                           lam=lam if lam is not None else 1e-4,
                           cap=cap if mode != "unconstrained" and cap is not None
                           else math.inf,
                           sigma_primal=args.sigma, sigma_dual=args.tau,
                           max_iters=args.iters, snapshot_every=snapshot)
        recon, diagnostics = solve(sino, cfg, img_shape,
                                   ground_truth=ground_truth)
        iters_done = diagnostics.last.k if diagnostics.last else args.iters
        metrics["final_objective"] = f"{diagnostics.last.objective:.17g}"
        metrics["final_cap_violation"] = f"{diagnostics.last.cap_violation:.17g}"
        metrics["final_data_residual"] = f"{diagnostics.last.data_residual:.17g}"
    t2 = time.perf_counter()

    if ground_truth is not None:
        metrics["psnr_db"] = f"{psnr(recon, ground_truth, peak=1.0, clip=True):.4f}"
    recon_path = os.path.join(args.out_dir, "recon.grid")
    gridio.write_grid(recon_path, gridio.image_to_grid(recon))
    gridio.export_png(recon, os.path.join(args.out_dir, "recon.png"),
                      window=(0.0, 1.0))
    csv_path = os.path.join(args.out_dir, "diagnostics.csv")
    if diagnostics is not None:
        diagnostics.write_csv(csv_path)
    else:
        with open(csv_path, "w") as fh:
            fh.write("k,objective,cap_violation,data_residual,psnr\n")
    t3 = time.perf_counter()

    timings = {"load_s": t1 - t0, "compute_s": t2 - t1, "save_s": t3 - t2}
    if iters_done:
        timings["iterations_per_second"] = iters_done / (t2 - t1)
        timings["ms_per_iteration"] = 1000.0 * (t2 - t1) / iters_done
    _write_manifest(os.path.join(args.out_dir, "manifest.txt"), "reconstruct",
                    {"in": args.infile, "mode": args.mode, "cap": cap,
                     "lambda": lam, "iters": args.iters,
                     "snapshot_every": args.snapshot_every,
                     "mask": args.mask, "ground_truth": args.ground_truth,
                     "size": img_shape[0], "threads": args.threads,
                     "out_dir": args.out_dir},
                    timings, metrics)
    return 0


def cmd_psnr(args):
    a = gridio.read_grid(args.a).values
    b = gridio.read_grid(args.b).values
    value = psnr(a, b, peak=args.peak, clip=args.clip)
    print("inf" if math.isinf(value) else f"{value:.4f}")
    return 0


def cmd_png(args):
    t0 = time.perf_counter()
    grid = gridio.read_grid(args.infile)
    gridio.export_png(grid.values, args.out, window=args.window)
    _write_manifest(args.out + ".manifest.txt", "png",
                    {"in": args.infile, "window": args.window,
                     "out": args.out},
                    {"total_s": time.perf_counter() - t0}, {})
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tvmar",
        description="CT metal-artifact reduction via constrained TV "
                    "reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate the test image")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--metal-pos", type=_int_pair, default=None,
                   metavar="ROW,COL")
    p.add_argument("--metal-size", type=_int_pair, default=(10, 10),
                   metavar="ROWS,COLS")
    p.add_argument("--metal-value", type=float, default=3.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("project", help="forward project an image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--angles", type=int, default=180)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("cap", help="saturate sinogram values at a threshold")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--cap", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out", default=None)

    p = sub.add_parser("noise", help="add relative Gaussian noise")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level-ref", choices=("max", "mean"), default="max")
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct", help="reconstruct an image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", required=True,
                   choices=("fbp", "bp") + tuple(CP_MODES))
    p.add_argument("--mask", default=None)
    p.add_argument("--cap", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--log-lambda", dest="log_lambda", type=float, default=None)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--snapshot-every", type=int, default=0,
                   help="0 = one snapshot per percent of the run")
    p.add_argument("--sigma", type=float, default=None,
                   help="primal step (default: largest valid)")
    p.add_argument("--tau", type=float, default=None,
                   help="dual step (default: largest valid)")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("psnr", help="compare two grids")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--clip", action="store_true")

    p = sub.add_parser("png", help="render a grid to 8-bit grayscale PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--window", type=_float_pair, default=(0.0, 1.0),
                   metavar="LO,HI")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "reconstruct":
        args.threads = _default_threads()
    try:
        if args.command == "phantom":
            return cmd_phantom(args)
        if args.command == "project":
            return cmd_project(args)
        if args.command == "cap":
            return cmd_cap(args)
        if args.command == "noise":
            return cmd_noise(args)
        if args.command == "reconstruct":
            return cmd_reconstruct(args, parser)
        if args.command == "psnr":
            return cmd_psnr(args)
        if args.command == "png":
            return cmd_png(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigurationError,) as exc:
        print(f"tvmar: configuration error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"tvmar: divergence: {exc}", file=sys.stderr)
        return 3
    except gridio.GridFormatError as exc:
        print(f"tvmar: file format error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"tvmar: I/O error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"tvmar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
