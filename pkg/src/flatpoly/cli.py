"""Command-line interface.

Subcommands: extract-unorganized, extract-organized, extract-mesh, peaks,
bench.  All read parameters from a config file (see the README for the
grammar); exit code is 0 on success, 1 with a stage-attributed message on
failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from flatpoly import accumulator, io
from flatpoly.config import PipelineConfig, load_config
from flatpoly.pipeline import StageError, bench, run_scene


def _load_config(args, kind: str) -> PipelineConfig:
    if args.config:
        cfg = load_config(args.config)
        if cfg.kind != kind:
            raise ValueError(f"config kind {cfg.kind!r} does not match subcommand {kind!r}")
    else:
        if kind == "unorganized":
            cfg = PipelineConfig(kind=kind, fixed_normals=np.array([[0.0, 0.0, 1.0]]))
        else:
            cfg = PipelineConfig(kind=kind)
    if args.threads is not None:
        cfg.threads = args.threads
        cfg.validate()
    return cfg


def _load_input(path, kind: str):
    if kind == "mesh":
        return io.load_mesh(path)
    data = io.load_cloud(path)
    if kind == "organized" and data.ndim != 3:
        raise ValueError(f"{path} is not an organized cloud (no grid header)")
    if kind == "unorganized" and data.ndim == 3:
        data = data.reshape(-1, 3)
        data = data[np.all(np.isfinite(data), axis=1)]
    return data


def _cmd_extract(args, kind: str) -> int:
    cfg = _load_config(args, kind)
    data = _load_input(args.input, kind)
    result = run_scene(cfg, data)
    if args.output:
        io.write_polygons(result.polygons, args.output, stage_timings=result.timings)
    if args.emit_image and result.image is not None:
        io.write_pgm(result.image.pixels, args.emit_image)
    print(f"{len(result.segments)} segment(s), {len(result.polygons)} polygon(s)")
    for stage, ms in result.timings.items():
        print(f"  {stage}: {ms:.2f} ms")
    for label, index, exc in result.errors:
        print(f"warning: polygon extraction failed (group {label}, segment {index}): {exc}",
              file=sys.stderr)
    return 0


def _cmd_peaks(args) -> int:
    cfg = _load_config(args, args.kind)
    data = _load_input(args.input, args.kind)
    if args.kind == "mesh":
        mesh = data
    else:
        from flatpoly.mesh import mesh_from_opc, triangulate_unorganized

        mesh = mesh_from_opc(data) if data.ndim == 3 else triangulate_unorganized(data)
    nm = cfg.normals
    ga = accumulator.build_accumulator(nm.level)
    accumulator.integrate_normals(ga, mesh.normals, nm.sample_pct)
    img = accumulator.unwrap_to_image(ga)
    raw_n, raw_w = accumulator.detect_peaks(img, nm.v_min)
    peaks = accumulator.cluster_peaks(raw_n, raw_w, nm.d_peak)
    print(f"# {len(peaks)} dominant plane normal(s)  (level={nm.level}, "
          f"v_min={nm.v_min}, d_peak={nm.d_peak}, sample_pct={nm.sample_pct})")
    print(f"{'nx':>12} {'ny':>12} {'nz':>12} {'weight':>10}")
    for n, w in zip(peaks.normals, peaks.weights):
        print(f"{n[0]:>12.6f} {n[1]:>12.6f} {n[2]:>12.6f} {w:>10.1f}")
    if args.emit_image:
        io.write_pgm(img.pixels, args.emit_image)
    return 0


def _cmd_bench(args) -> int:
    cfg = _load_config(args, args.kind)
    data = _load_input(args.input, args.kind)
    sweep = None
    if args.threads_sweep:
        sweep = [int(tok) for tok in args.threads_sweep.split(",")]
    report = bench(cfg, data, repetitions=args.repetitions, thread_sweep=sweep)
    print(report.format())
    if args.kernels:
        from flatpoly.bench_kernels import kernel_comparison

        print()
        print(kernel_comparison())
    return 0


def _add_common(sub):
    sub.add_argument("input", help="input file")
    sub.add_argument("--config", help="pipeline config file")
    sub.add_argument("--threads", type=int, default=None, help="worker thread count")
    sub.add_argument("--output", help="polygon document output path")
    sub.add_argument("--emit-image", help="write the unwrapped histogram as a PGM")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatpoly",
        description="Extract planar segments and polygons from 3D sensor data.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    for kind in ("unorganized", "organized", "mesh"):
        sub = subs.add_parser(f"extract-{kind}", help=f"run the pipeline on {kind} input")
        _add_common(sub)
        sub.set_defaults(func=lambda a, k=kind: _cmd_extract(a, k))

    peaks = subs.add_parser("peaks", help="dominant plane normal estimation only")
    _add_common(peaks)
    peaks.add_argument("--kind", choices=("organized", "unorganized", "mesh"),
                       default="mesh", help="how to interpret the input file")
    peaks.set_defaults(func=_cmd_peaks)

    bench_p = subs.add_parser("bench", help="repeat the pipeline and report timings")
    _add_common(bench_p)
    bench_p.add_argument("--kind", choices=("organized", "unorganized", "mesh"),
                         default="organized")
    bench_p.add_argument("--repetitions", type=int, default=3)
    bench_p.add_argument("--threads-sweep", help="comma-separated thread counts")
    bench_p.add_argument("--kernels", action="store_true",
                         help="also compare compiled and pure-Python kernels")
    bench_p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
