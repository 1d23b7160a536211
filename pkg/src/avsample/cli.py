"""Command line front end: calibrate schedules, run sampling, benchmark.

Exit codes: 0 success, 1 usage error, 2 non-converged calibration (schedule
still written), 3 IO error. All outputs are UTF-8 with LF line endings.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from ._backend import BACKEND_NAME, resolve_threads
from .bench import CSV_HEADER, METHODS, bench_rows, write_bench_csv
from .calibrate import CalibrationConfig, calibrate_cascade, read_schedule, write_schedule
from .datasets import load_manifest, write_xyz
from .errors import AvsampleError, ScheduleMismatch
from .sampling import run_cascade

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="avsample", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="calibrate per-layer voxel sizes against target ratios")
    cal.add_argument("--manifest", required=True, help="dataset manifest file")
    cal.add_argument("--ref-ratio", action="append", type=float, required=True,
                     help="target downsampling ratio; repeat once per layer")
    cal.add_argument("--v0", type=float, default=0.05, help="initial voxel size (meters)")
    cal.add_argument("--kp", type=float, default=None, help="proportional gain (default 0.8/ref_ratio)")
    cal.add_argument("--ki", type=float, default=None, help="integral gain (default 0.16/ref_ratio)")
    cal.add_argument("--ir", type=float, default=1.0, help="step-size gain")
    cal.add_argument("--epsilon", type=float, default=1e-3)
    cal.add_argument("--max-iters", type=int, default=500)
    cal.add_argument("--out", required=True, help="schedule file to write; a per-iteration "
                     "CSV is written next to it with suffix .iterations.csv")

    smp = sub.add_parser("sample", help="run the downsampling cascade from a schedule")
    smp.add_argument("--manifest", required=True)
    smp.add_argument("--schedule", required=True, help="schedule written by calibrate")
    smp.add_argument("--nbr-size", type=int, default=3)
    smp.add_argument("--out", required=True, help="output directory")

    ben = sub.add_parser("bench", help="measure method latency over point counts")
    ben.add_argument("--sizes", default="10000,20000,40000,80000,160000",
                     help="comma-separated ascending point counts")
    ben.add_argument("--methods", default=",".join(METHODS),
                     help=f"comma-separated subset of {','.join(METHODS)}")
    ben.add_argument("--repeats", type=int, default=100)
    ben.add_argument("--warmup", type=int, default=10)
    ben.add_argument("--nbr-size", type=int, default=3)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--threads", type=int, default=None,
                     help="kernel worker count (default: AVS_THREADS or 1)")
    ben.add_argument("--out", required=True, help="CSV output path")
    return parser


def _cmd_calibrate(args) -> int:
    manifest = load_manifest(args.manifest)
    try:
        configs = [
            CalibrationConfig(
                ref_ratio=r, v0=args.v0, i_r=args.ir, k_p=args.kp, k_i=args.ki,
                epsilon=args.epsilon, max_iterations=args.max_iters,
            )
            for r in args.ref_ratio
        ]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    result = calibrate_cascade(manifest, configs)
    write_schedule(args.out, result)
    csv_path = Path(args.out).with_name(Path(args.out).name + ".iterations.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["layer", "iteration", "voxel_size", "ratio", "err"])
        for layer_index, layer in enumerate(result.layers):
            for it, rec in enumerate(layer.state.history, 1):
                writer.writerow([layer_index, it, f"{rec.voxel_size:.9g}",
                                 f"{rec.ratio:.9g}", f"{rec.err:.9g}"])

    for i, layer in enumerate(result.layers):
        status = "converged" if layer.converged else "NOT CONVERGED"
        print(f"layer {i}: voxel_size={layer.voxel_size:.6g} "
              f"ratio={layer.achieved_ratio:.6g} ({status}, "
              f"{layer.state.iteration} iterations)")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _cmd_sample(args) -> int:
    manifest = load_manifest(args.manifest)
    entries = read_schedule(args.schedule)
    if not entries:
        raise ScheduleMismatch("schedule file is empty")
    if [e.layer_index for e in entries] != list(range(len(entries))):
        raise ScheduleMismatch("schedule layer indices must be contiguous from 0")
    sizes = [e.voxel_size for e in entries]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / "summary.csv"
    with open(summary, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "layer", "n_in", "n_out", "ratio"])
        for frame_index, frame in enumerate(manifest):
            layers = run_cascade(frame, sizes, nbr_size=args.nbr_size)
            n_in = frame.count
            for layer_index, layer in enumerate(layers):
                n_out = layer.points.count
                writer.writerow([frame_index, layer_index, n_in, n_out, f"{n_in / n_out:.9g}"])
                write_xyz(out_dir / f"frame{frame_index:04d}_layer{layer_index}.xyz", layer.points)
                n_in = n_out
    print(f"wrote {summary}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    methods = [m for m in args.methods.split(",") if m]
    threads = resolve_threads(args.threads)
    print(f"backend={BACKEND_NAME} threads={threads}")
    rows = bench_rows(
        sizes, methods, repeats=args.repeats, warmup=args.warmup,
        seed=args.seed, nbr_size=args.nbr_size, threads=threads,
    )
    write_bench_csv(args.out, rows)
    for row in rows:
        print(",".join(str(row[k]) for k in CSV_HEADER))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"calibrate": _cmd_calibrate, "sample": _cmd_sample, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except ScheduleMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, AvsampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
