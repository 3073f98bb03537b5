"""genre-haar: denoise images, evaluate a corpus, print cost tables, dump subbands.

Exit codes: 0 success, 1 usage, 2 I/O or bad input image, 3 numerical failure.
"""
import argparse
import csv
import io as _io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import costmodel, experiment, genre, image, metrics, uwt
from . import io as imageio
from ._backend import NAME as BACKEND

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3
MAX_PIXELS = 4096 * 4096
IMAGE_SUFFIXES = (".pgm", ".png")

EVAL_FIELDS = ["image", "distribution", "sigma", "seed", "precision", "input_psnr", "input_ssim",
               "output_psnr", "output_ssim", "psnr_gain"]


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_pipeline_flags(p):
    p.add_argument("--sigma", type=float, default=25.0, help="noise standard deviation")
    p.add_argument("--dist", choices=("gaussian", "uniform", "laplacian"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--solver", choices=("closed", "gd"), default="closed")
    p.add_argument("--mu", type=float, default=2.0**-13, help="gradient-descent step")
    p.add_argument("--iters", type=int, default=genre.SolverConfig.max_iters)
    p.add_argument("--tol", type=float, default=genre.SolverConfig.tol)
    p.add_argument("--realization", choices=uwt.REALIZATIONS, default="UWT-2D",
                   help="analysis filter bank")
    p.add_argument("--synthesis", choices=uwt.REALIZATIONS, default="RUWT-2D",
                   help="synthesis filter bank (float precision only)")
    p.add_argument("--precision", choices=experiment.PRECISIONS, default="float")
    p.add_argument("--quantize-input", action="store_true",
                   help="round and clip the noisy observation to 8 bits")
    p.add_argument("--psnr-peak", choices=experiment.PEAK_MODES, default="reference",
                   help="PSNR peak: clean image max, noisy observation max, or 255")
    p.add_argument("--report", choices=("human", "csv", "json"), default="human")
    p.add_argument("--report-file", help="write the report here instead of stdout")


def build_parser():
    parser = _Parser(prog="genre-haar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("denoise", help="add noise to (or take) an image and denoise it")
    d.add_argument("input")
    d.add_argument("-o", "--output", required=True, help="denoised image (.pgm or .png)")
    d.add_argument("--noisy-output", help="also write the noisy observation")
    d.add_argument("--assume-noisy", action="store_true",
                   help="input is already noisy: skip noise injection and reference metrics")
    d.add_argument("--pad", choices=("reflect",), help="extend to a multiple of 2^levels, then crop")
    _add_pipeline_flags(d)

    e = sub.add_parser("evaluate", help="score a corpus of clean images (CSV rows)")
    e.add_argument("images", nargs="*", help="image files or directories")
    e.add_argument("--dists", default=None,
                   help="comma-separated distributions (default: --dist)")
    e.add_argument("--precisions", default=None,
                   help="comma-separated precisions (default: --precision)")
    e.add_argument("--jobs", type=int, default=1)
    _add_pipeline_flags(e)

    c = sub.add_parser("cost-tables", help="additions per pixel and block-RAM tables")
    c.add_argument("--level", type=int, default=5)
    c.add_argument("--width", type=int, default=512)
    c.add_argument("--bit-width", type=int, default=16)
    c.add_argument("--report", choices=("human", "csv", "json"), default="csv")

    s = sub.add_parser("dump-subbands", help="write the analysis subbands as float32 planes")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--levels", type=int, default=5)
    s.add_argument("--realization", choices=uwt.REALIZATIONS, default="UWT-2D")
    return parser


# ---------------------------------------------------------------------------


def _solver_config(args):
    try:
        return genre.SolverConfig(
            method="closed-form" if args.solver == "closed" else "gradient-descent",
            mu=args.mu, max_iters=args.iters, tol=args.tol)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read(path):
    try:
        img = imageio.read_image(path)
    except (OSError, imageio.ImageFormatError) as e:
        raise InputError(str(e)) from None
    if img.size > MAX_PIXELS:
        raise InputError(f"{path}: {img.shape[1]}x{img.shape[0]} exceeds {MAX_PIXELS} pixels")
    return img


def _check_shape(img, levels, name):
    step = 2**levels
    h, w = img.shape
    if h % step or w % step:
        raise InputError(f"{name}: {w}x{h} is not divisible by 2^{levels} = {step} "
                         "(use --pad reflect)")


def _pad(img, levels):
    step = 2**levels
    h, w = img.shape
    ph, pw = -h % step, -w % step
    return np.pad(img, ((0, ph), (0, pw)), mode="symmetric"), (h, w)


def _fmt(v):
    if isinstance(v, float):
        return "inf" if v == float("inf") else f"{v:.4f}"
    return str(v)


def _emit(report, fmt, path=None):
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    elif fmt == "csv":
        flat = {k: (";".join(_fmt(x) for x in v) if isinstance(v, list) else v)
                for k, v in report.items() if not isinstance(v, dict)}
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow({k: _fmt(v) for k, v in flat.items()})
        text = buf.getvalue()
    else:
        lines = []
        for k, v in report.items():
            if isinstance(v, dict):
                lines.append(f"{k}:")
                lines += [f"  {kk}: {_fmt(vv)}" for kk, vv in v.items()]
            elif isinstance(v, list):
                lines.append(f"{k}: " + " ".join(_fmt(x) for x in v))
            else:
                lines.append(f"{k}: {_fmt(v)}")
        text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _json_safe(v):
    if isinstance(v, float) and v == float("inf"):
        return "inf"
    return v


def cmd_denoise(args):
    cfg = _solver_config(args)
    if args.precision != "float" and not (args.quantize_input or args.assume_noisy):
        raise UsageError("fixed precision needs 8-bit input: add --quantize-input")
    clean = _read(args.input)
    shape = clean.shape
    padded = False
    if args.pad:
        clean, shape = _pad(clean, args.levels)
        padded = clean.shape != shape
    _check_shape(clean, args.levels, args.input)

    model = image.NoiseModel(args.dist, args.sigma, args.seed)
    if args.assume_noisy:
        y = image.quantize_8bit(clean) if args.quantize_input else clean
    else:
        y = experiment.observe(clean, model, args.quantize_input)
    if args.precision != "float" and (np.any(y != np.round(y)) or y.min() < 0 or y.max() > 255):
        raise UsageError("fixed precision needs 8-bit input")
    x, diag, fixed_rep = experiment.denoise_observation(
        y, args.sigma, args.precision, cfg, args.levels, args.realization, args.synthesis)
    h, w = shape
    x, y_out, ref = x[:h, :w], y[:h, :w], clean[:h, :w]
    try:
        imageio.write_image(x, args.output)
        if args.noisy_output:
            imageio.write_image(y_out, args.noisy_output)
    except OSError as e:
        raise InputError(str(e)) from None

    report = {
        "input": args.input,
        "output": args.output,
        "width": w,
        "height": h,
        "precision": args.precision,
        "distribution": args.dist,
        "sigma": args.sigma,
        "seed": args.seed,
        "levels": args.levels,
        "realization": args.realization,
        "synthesis": args.synthesis if args.precision == "float" else "RUWT-2D",
        "backend": BACKEND,
        "padded": padded,
    }
    if not args.assume_noisy:
        peak = metrics.peak_for(args.psnr_peak, ref, y_out)
        written = imageio.read_image(args.output)
        report.update({
            "psnr_peak": peak,
            "input_psnr": _json_safe(metrics.psnr(ref, y_out, peak)),
            "input_ssim": metrics.ssim(ref, y_out),
            "output_psnr": _json_safe(metrics.psnr(ref, written, peak)),
            "output_ssim": metrics.ssim(ref, written),
        })
        if isinstance(report["input_psnr"], float) and isinstance(report["output_psnr"], float):
            report["psnr_gain"] = report["output_psnr"] - report["input_psnr"]
    report["alpha"] = [float(a) for a in diag.alpha]
    report["risk"] = float(diag.risk)
    report["solver"] = diag.report.as_dict()
    if fixed_rep is not None:
        report["fixed_point"] = {k: v for k, v in fixed_rep.as_dict().items()
                                 if k not in ("psnr_fixed", "psnr_float", "psnr_delta")}
        if fixed_rep.overflow_count:
            report["warning"] = f"{fixed_rep.overflow_count} saturation events in the fixed-point datapath"
    _emit(report, args.report, args.report_file)
    return EXIT_OK


def _corpus(paths):
    out = []
    for p in paths:
        if os.path.isdir(p):
            out += sorted(os.path.join(p, f) for f in os.listdir(p)
                          if f.lower().endswith(IMAGE_SUFFIXES))
        else:
            out.append(p)
    return out


def _eval_one(job):
    path, dist, precision, ns = job
    clean = _read(path)
    _check_shape(clean, ns["levels"], path)
    cfg = genre.SolverConfig(**ns["cfg"])
    model = image.NoiseModel(dist, ns["sigma"], ns["seed"])
    r = experiment.run_case(clean, model, precision, ns["quantize"] or precision != "float",
                            ns["peak"], cfg, ns["levels"], ns["realization"], ns["synthesis"])
    return {
        "image": os.path.splitext(os.path.basename(path))[0],
        "distribution": dist,
        "sigma": ns["sigma"],
        "seed": ns["seed"],
        "precision": precision,
        "input_psnr": r.input_psnr,
        "input_ssim": r.input_ssim,
        "output_psnr": r.output_psnr,
        "output_ssim": r.output_ssim,
        "psnr_gain": r.psnr_gain,
    }


def cmd_evaluate(args):
    cfg = _solver_config(args)
    dists = args.dists.split(",") if args.dists else [args.dist]
    precisions = args.precisions.split(",") if args.precisions else [args.precision]
    for d in dists:
        if d not in image.DISTRIBUTIONS or d == "custom":
            raise UsageError(f"unknown distribution {d!r}")
    for p in precisions:
        if p not in experiment.PRECISIONS:
            raise UsageError(f"unknown precision {p!r}")
    ns = {"levels": args.levels, "sigma": args.sigma, "seed": args.seed,
          "quantize": args.quantize_input, "peak": args.psnr_peak,
          "realization": args.realization, "synthesis": args.synthesis,
          "cfg": {"method": cfg.method, "mu": cfg.mu, "max_iters": cfg.max_iters, "tol": cfg.tol}}
    jobs = [(path, d, p, ns) for path in _corpus(args.images) for d in dists for p in precisions]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_eval_one, jobs))
    else:
        rows = [_eval_one(j) for j in jobs]

    if args.report == "json":
        text = json.dumps([{k: _json_safe(v) for k, v in r.items()} for r in rows],
                          indent=2, sort_keys=True) + "\n"
    else:
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=EVAL_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
        text = buf.getvalue()
    if args.report_file:
        with open(args.report_file, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_cost_tables(args):
    if args.level < 1 or args.width < 1 or args.bit_width < 1:
        raise UsageError("level, width and bit width must be positive")
    if args.report == "csv":
        sys.stdout.write(costmodel.tables_csv(args.level, args.width, args.bit_width))
        return EXIT_OK
    adds = costmodel.additions_table(args.level)
    brams = costmodel.bram_table(args.level, args.width, args.bit_width)
    skew = costmodel.alignment_skew(args.level, args.width)
    if args.report == "json":
        report = {
            "level": args.level,
            "additions_per_pixel": {n: {"decomposition": str(d), "recomposition": str(r)}
                                    for n, d, r in adds},
            "bram36": {n: {"decomposition": str(d.rational), "decomposition_blocks": d.blocks,
                           "recomposition": str(r.rational), "recomposition_blocks": r.blocks}
                       for n, d, r in brams},
            "alignment_skew_cycles": skew,
        }
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    print(f"level {args.level}: average additions per output pixel (decomposition, recomposition)")
    for n, d, r in adds:
        print(f"  {n:<16} {float(d):8.2f} {float(r):8.2f}")
    print(f"36K block RAMs at {args.bit_width} bits, width {args.width} (exact, whole blocks)")
    for n, d, r in brams:
        print(f"  {n:<16} {float(d.rational):6g} ({d.blocks:>2}) {float(r.rational):6g} ({r.blocks:>2})")
    print(f"first level-{args.level} output skew: {skew} cycles")
    return EXIT_OK


def cmd_dump_subbands(args):
    img = _read(args.input)
    try:
        bands = uwt.decompose(img, args.levels, args.realization)
    except ValueError as e:
        raise InputError(f"{args.input}: {e}") from None
    try:
        uwt.write_subbands(args.output, bands)
    except OSError as e:
        raise InputError(str(e)) from None
    return EXIT_OK


COMMANDS = {
    "denoise": cmd_denoise,
    "evaluate": cmd_evaluate,
    "cost-tables": cmd_cost_tables,
    "dump-subbands": cmd_dump_subbands,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "levels", 1) < 1:
        print("genre-haar: error: --levels must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"genre-haar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as e:
        print(f"genre-haar: {e}", file=sys.stderr)
        return EXIT_IO
    except genre.SolverError as e:
        print(f"genre-haar: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"genre-haar: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
