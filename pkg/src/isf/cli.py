"""Command-line entry point: ``isf segment | metrics | bench | sky``.

Exit codes: 0 success, 2 unreadable input, 64 bad usage, 65 mismatched
data dimensions, 70 internal invariant failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .forest import PRESETS, IsfConfig, isf_run, verify_forest
from .formats import (
    FormatError,
    MetricRow,
    load_labels,
    read_input,
    write_labels,
    write_metrics_csv,
    write_overlay,
    write_pnm,
)
from .metrics import DimensionError, dice, evaluate
from .seeding import ForestConsistencyError
from .sky import sky_mask

EXIT_INPUT = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

log = logging.getLogger("isf")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _read(path: str):
    try:
        return read_input(Path(path).read_bytes())
    except (OSError, FormatError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _read_labels(path: str) -> np.ndarray:
    try:
        return load_labels(path)
    except (OSError, FormatError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _config(args, method: str, k: int, alpha: float) -> IsfConfig:
    try:
        return IsfConfig(method, k, alpha, args.beta, args.iters)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _segment(lattice, config: IsfConfig):
    try:
        return isf_run(lattice, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write(path: str | Path, data: bytes) -> None:
    Path(path).write_bytes(data)


# -- subcommands -----------------------------------------------------------------------


def cmd_segment(args) -> int:
    lattice, samples, maxval = _read(args.input)
    gt = _read_labels(args.gt) if args.gt else None
    if gt is not None and gt.shape != lattice.shape:
        raise DimensionError(f"ground truth {gt.shape} vs image {lattice.shape}")
    config = _config(args, args.method, args.superpixels, args.alpha)

    t0 = time.perf_counter()
    labels, diag = _segment(lattice, config)
    seconds = time.perf_counter() - t0

    report = verify_forest(diag.forest, lattice)
    if not report.ok:
        raise ForestConsistencyError("; ".join(report.messages))

    label_img = lattice.as_image(labels)
    _write(args.labels, write_labels(label_img))
    if args.overlay:
        if lattice.ndim != 2:
            raise UsageError("--overlay needs a 2D image")
        _write(args.overlay, write_overlay(samples, label_img, gt, maxval))
    if args.seed_dump:
        seeds = diag.seeds[-1]
        axes = "xyz"[: lattice.ndim]
        lines = ["label," + ",".join(axes)]
        lines += [f"{j + 1}," + ",".join(map(str, c)) for j, c in enumerate(seeds.coords)]
        _write(args.seed_dump, ("\n".join(lines) + "\n").encode())
    if args.figure:
        from .plotting import plot_functional

        plot_functional(diag.functional, args.figure, f"{args.method} k'={diag.k}")
    if args.verbose:
        print(f"k'={diag.k}", file=sys.stderr)
        for i, f in enumerate(diag.functional):
            print(f"iter {i + 1}: F={f:.6f} changed={diag.changed[i]}", file=sys.stderr)
    if gt is not None:
        m = evaluate(label_img, gt, args.br_radius)
        row = MetricRow(
            Path(args.input).name, args.method, diag.k, args.alpha, m.br, m.ue, m.dice, seconds
        )
        sys.stdout.write(write_metrics_csv([row]).decode())
    return 0


def cmd_metrics(args) -> int:
    labels = _read_labels(args.labels)
    gt = _read_labels(args.gt)
    m = evaluate(labels, gt, args.br_radius)
    row = MetricRow(Path(args.labels).name, "", m.k, None, m.br, m.ue, m.dice, None)
    sys.stdout.write(write_metrics_csv([row]).decode())
    return 0


def _bench_inputs(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        files = sorted(
            f for f in p.iterdir() if f.suffix.lower() in (".ppm", ".pgm", ".pnm", ".isf3")
        )
        if not files:
            raise InputError(f"no .ppm/.pgm/.isf3 files in {path}")
        return files
    if not p.exists():
        raise InputError(f"cannot read {path}: no such file")
    return [p]


def _bench_gt(gt: str | None, image: Path) -> Path | None:
    if not gt:
        return None
    g = Path(gt)
    if g.is_dir():
        hits = sorted(g.glob(image.stem + ".*"))
        return hits[0] if hits else None
    return g


def bench_rows(args, timer=time.perf_counter) -> list[MetricRow]:
    """Mean wall time of the segmentation call for every (image, k, alpha).

    Reading, Lab conversion and metric evaluation stay outside the timed
    bracket.
    """
    rows = []
    for image in _bench_inputs(args.input):
        lattice, _, _ = _read(str(image))
        gt_path = _bench_gt(args.gt, image)
        gt = _read_labels(str(gt_path)) if gt_path else None
        if gt is not None and gt.shape != lattice.shape:
            raise DimensionError(f"ground truth {gt.shape} vs image {lattice.shape}")
        for k in args.superpixels:
            for alpha in args.alpha:
                config = _config(args, args.method, k, alpha)
                elapsed = []
                for _ in range(args.repeat):
                    t0 = timer()
                    labels, diag = _segment(lattice, config)
                    elapsed.append(timer() - t0)
                row = MetricRow(image.name, args.method, k, alpha, seconds=float(np.mean(elapsed)))
                if gt is not None:
                    m = evaluate(lattice.as_image(labels), gt, args.br_radius)
                    row.br, row.ue, row.dice = m.br, m.ue, m.dice
                rows.append(row)
    return rows


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError("--repeat must be >= 1")
    rows = bench_rows(args)
    data = write_metrics_csv(rows)
    if args.out:
        _write(args.out, data)
    else:
        sys.stdout.write(data.decode())
    if args.figure:
        from .plotting import plot_bench

        plot_bench(rows, args.figure)
    return 0


def cmd_sky(args) -> int:
    lattice, _, _ = _read(args.input)
    if lattice.ndim != 2 or lattice.channels != 3:
        raise UsageError("sky segmentation needs a 2D color (P6) image")
    config = _config(args, "mix-mean", args.superpixels, args.alpha)
    labels, _ = _segment(lattice, config)
    mask = sky_mask(lattice, labels, args.threshold)
    _write(args.out, write_pnm(mask.astype(np.uint8) * 255, 255))
    if args.gt:
        gt = _read_labels(args.gt)
        if gt.shape != mask.shape:
            raise DimensionError(f"ground truth {gt.shape} vs image {mask.shape}")
        row = MetricRow(Path(args.input).name, "mix-mean", args.superpixels, args.alpha,
                        dice=dice(mask, gt != 0))
        sys.stdout.write(write_metrics_csv([row]).decode())
    return 0


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, alpha=0.5):
        p.add_argument("--alpha", type=float, default=alpha)
        p.add_argument("--beta", type=float, default=12.0)
        p.add_argument("--iters", type=int, default=10)
        p.add_argument("--br-radius", type=int, default=2)

    p = sub.add_parser("segment", help="segment an image or volume into superpixels")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=sorted(PRESETS), default="mix-mean")
    p.add_argument("--superpixels", "-k", type=int, required=True)
    common(p)
    p.add_argument("--labels", required=True, help="output label map (P5 16-bit or ISF3)")
    p.add_argument("--overlay", help="output P6 with cyan superpixel borders")
    p.add_argument("--gt", help="ground-truth label map; prints a metrics CSV row")
    p.add_argument("--seed-dump", help="write final seeds as CSV")
    p.add_argument("--figure", help="write the per-iteration cost trace as an image")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("metrics", help="compare a label map with ground truth")
    p.add_argument("--labels", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--br-radius", type=int, default=2)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="time segmentation over k and alpha sweeps")
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--method", choices=sorted(PRESETS), default="mix-mean")
    p.add_argument("--superpixels", type=_ints, default=[250, 500, 1000, 5000])
    p.add_argument("--alpha", type=_floats, default=[0.5])
    p.add_argument("--beta", type=float, default=12.0)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--br-radius", type=int, default=2)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--gt", help="ground-truth file, or directory matched by file stem")
    p.add_argument("--out", help="CSV output path (default: standard output)")
    p.add_argument("--figure", help="render time/BR/UE curves to this image file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sky", help="extract the sky region of a color image")
    p.add_argument("--input", required=True)
    p.add_argument("--superpixels", "-k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.08)
    p.add_argument("--beta", type=float, default=12.0)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--threshold", type=float, required=True, help="Lab merge distance")
    p.add_argument("--out", required=True, help="output P5 mask (255 = sky)")
    p.add_argument("--gt", help="ground-truth sky mask; prints Dice")
    p.set_defaults(func=cmd_sky)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"isf: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as exc:
        print(f"isf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionError as exc:
        print(f"isf: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ForestConsistencyError as exc:
        print(f"isf: internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
