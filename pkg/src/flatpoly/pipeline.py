"""Scene orchestration: front-end, smoothing, normal estimation, extraction,
post-processing, with per-stage wall-clock timings.

Outputs are deterministic for a fixed config: region-growing tasks are one
per dominant-normal label and results are combined in label order, so the
polygon set does not depend on the thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from flatpoly import accumulator
from flatpoly.config import PipelineConfig
from flatpoly.geometry import Polygon, Polygon2D, project_to_plane
from flatpoly.mesh import HalfEdgeMesh, mesh_from_opc, triangulate_unorganized
from flatpoly.polygon import extract_polygon
from flatpoly.postprocess import run_pipeline
from flatpoly.segmentation import (
    PlanarSegment,
    group_assignment,
    region_growing_task,
)
from flatpoly.smoothing import bilateral_filter_opc, laplacian_filter_opc


class StageError(RuntimeError):
    """Pipeline failure with the owning stage named."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class SceneResult:
    dominant_normals: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    segments: list[PlanarSegment] = field(default_factory=list)
    polygons_raw: list[Polygon] = field(default_factory=list)
    polygons: list[Polygon2D] = field(default_factory=list)
    errors: list = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    image: object = None  # UnwrappedImage when estimation ran

    @property
    def total_ms(self) -> float:
        return self.timings.get("total", 0.0)


class _Timer:
    def __init__(self, timings: dict, stage: str):
        self.timings = timings
        self.stage = stage

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.stage] = (time.perf_counter() - self.t0) * 1e3
        if isinstance(exc, Exception) and not isinstance(exc, StageError):
            raise StageError(self.stage, exc) from exc
        return False


def polygon_to_2d(poly: Polygon, points: np.ndarray) -> Polygon2D:
    """Project an index polygon's rings into its plane's 2D basis."""
    return Polygon2D(
        shell=project_to_plane(points[poly.shell], poly.plane),
        holes=[project_to_plane(points[h], poly.plane) for h in poly.holes],
        plane=poly.plane,
    )


def _extract_all(mesh, groups, dominant, params, threads):
    """Run one region-growing task per label, optionally on a thread pool."""
    labels = range(len(dominant))
    if threads <= 1:
        results = [
            region_growing_task(mesh, groups, lab, dominant[lab], params,
                                extract_polygon=extract_polygon)
            for lab in labels
        ]
    else:
        # separate pools for region tasks and their spawned polygon tasks;
        # region tasks block on polygon futures, so sharing one pool could
        # deadlock once every worker holds a region task
        with ThreadPoolExecutor(threads) as regions, ThreadPoolExecutor(threads) as polys:
            spawn = lambda fn, *args: polys.submit(fn, *args)
            futures = [
                regions.submit(region_growing_task, mesh, groups, lab, dominant[lab],
                               params, extract_polygon, spawn)
                for lab in labels
            ]
            results = [f.result() for f in futures]

    segments, polygons, errors = [], [], []
    for segs, pls, errs in results:
        segments.extend(segs)
        polygons.extend(pls)
        errors.extend(errs)
    return segments, polygons, errors


def run_scene(config: PipelineConfig, data) -> SceneResult:
    """Execute the full pipeline on one input.

    ``data`` is an (n, 3) cloud for kind="unorganized", an (M, N, 3) grid for
    kind="organized", or a HalfEdgeMesh for kind="mesh".  Empty inputs give
    an empty result without error.
    """
    result = SceneResult()
    timings = result.timings
    t_start = time.perf_counter()

    if not isinstance(data, HalfEdgeMesh) and np.size(data) == 0:
        timings["total"] = (time.perf_counter() - t_start) * 1e3
        return result

    if config.kind == "organized":
        opc = np.asarray(data, dtype=np.float64)
        if config.laplacian is not None:
            with _Timer(timings, "laplacian"):
                opc = laplacian_filter_opc(opc, config.laplacian)
        with _Timer(timings, "front_end"):
            mesh = mesh_from_opc(opc)
        if config.bilateral is not None:
            with _Timer(timings, "bilateral"):
                mesh.normals = bilateral_filter_opc(opc, config.bilateral, mesh.trimap)
    elif config.kind == "unorganized":
        with _Timer(timings, "front_end"):
            mesh = triangulate_unorganized(np.asarray(data, dtype=np.float64))
    elif config.kind == "mesh":
        if not isinstance(data, HalfEdgeMesh):
            raise StageError("front_end", TypeError("mesh input requires a HalfEdgeMesh"))
        mesh = data
        timings["front_end"] = 0.0
    else:  # pragma: no cover - config validation rejects this
        raise StageError("front_end", ValueError(f"unknown kind {config.kind!r}"))

    with _Timer(timings, "normal_estimation"):
        if config.fixed_normals is not None:
            result.dominant_normals = config.fixed_normals
        else:
            nm = config.normals
            ga = accumulator.build_accumulator(nm.level)
            accumulator.integrate_normals(ga, mesh.normals, nm.sample_pct)
            img = accumulator.unwrap_to_image(ga)
            raw_n, raw_w = accumulator.detect_peaks(img, nm.v_min)
            peaks = accumulator.cluster_peaks(raw_n, raw_w, nm.d_peak)
            result.dominant_normals = peaks.normals
            result.image = img

    if len(result.dominant_normals) == 0:
        timings["total"] = (time.perf_counter() - t_start) * 1e3
        return result

    with _Timer(timings, "extraction"):
        groups = group_assignment(mesh, result.dominant_normals,
                                  config.segmentation.l_max, config.segmentation.ang_min)
        segments, polygons_raw, errors = _extract_all(
            mesh, groups, result.dominant_normals, config.segmentation, config.threads)
        result.segments = segments
        result.polygons_raw = polygons_raw
        result.errors = errors

    with _Timer(timings, "postprocess"):
        finished = []
        for poly in polygons_raw:
            if poly is None:
                continue
            poly2d = polygon_to_2d(poly, mesh.points)
            finished.extend(run_pipeline(poly2d, config.postprocess))
        result.polygons = finished

    timings["total"] = (time.perf_counter() - t_start) * 1e3
    return result


@dataclass
class BenchReport:
    stage_ms: dict[str, tuple[float, float]]          # stage -> (mean, std)
    repetitions: int
    sweep: dict[int, dict[int, float]] = field(default_factory=dict)
    # sweep[num_normals][threads] = mean extraction ms

    def format(self) -> str:
        lines = [f"stage timings over {self.repetitions} repetition(s):"]
        width = max(len(s) for s in self.stage_ms)
        for stage, (mean, std) in self.stage_ms.items():
            lines.append(f"  {stage:<{width}}  {mean:9.3f} ms  +/- {std:.3f}")
        if self.sweep:
            thread_counts = sorted(next(iter(self.sweep.values())))
            lines.append("")
            lines.append("extraction speedup vs threads (by dominant normal count):")
            header = "  normals " + "".join(f"  T={t:<6}" for t in thread_counts)
            lines.append(header)
            for n_dn in sorted(self.sweep):
                base = self.sweep[n_dn][thread_counts[0]]
                cells = "".join(
                    f"  {base / self.sweep[n_dn][t]:<8.2f}" for t in thread_counts)
                lines.append(f"  {n_dn:<8}{cells}")
        return "\n".join(lines)


def bench(config: PipelineConfig, data, repetitions: int = 3,
          thread_sweep: list[int] | None = None) -> BenchReport:
    """Mean/std per stage over repeated runs, plus an optional thread sweep.

    The sweep times segmentation + polygon extraction for every prefix of
    the dominant-normal list at each thread count (speedups are reported
    relative to the first count, typically 1).
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    samples: dict[str, list[float]] = {}
    result = None
    for _ in range(repetitions):
        result = run_scene(config, data)
        for stage, ms in result.timings.items():
            samples.setdefault(stage, []).append(ms)
    stage_ms = {
        stage: (float(np.mean(vals)), float(np.std(vals)))
        for stage, vals in samples.items()
    }
    report = BenchReport(stage_ms=stage_ms, repetitions=repetitions)

    if thread_sweep and len(result.dominant_normals):
        if config.kind == "organized":
            opc = np.asarray(data, dtype=np.float64)
            if config.laplacian is not None:
                opc = laplacian_filter_opc(opc, config.laplacian)
            mesh = mesh_from_opc(opc)
            if config.bilateral is not None:
                mesh.normals = bilateral_filter_opc(opc, config.bilateral, mesh.trimap)
        elif config.kind == "unorganized":
            mesh = triangulate_unorganized(np.asarray(data, dtype=np.float64))
        else:
            mesh = data
        for n_dn in range(1, len(result.dominant_normals) + 1):
            dominant = result.dominant_normals[:n_dn]
            groups = group_assignment(mesh, dominant, config.segmentation.l_max,
                                      config.segmentation.ang_min)
            report.sweep[n_dn] = {}
            for threads in thread_sweep:
                best = []
                for _ in range(repetitions):
                    t0 = time.perf_counter()
                    _extract_all(mesh, groups, dominant, config.segmentation, threads)
                    best.append((time.perf_counter() - t0) * 1e3)
                report.sweep[n_dn][threads] = float(np.mean(best))
    return report
