"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import functools
import time

import numpy as np
import pytest

from flatpoly.accumulator import (
    build_accumulator,
    cluster_peaks,
    detect_peaks,
    find_cell_indices,
    integrate_normals,
    unwrap_to_image,
)
from flatpoly.config import NormalEstimationParams, PipelineConfig
from flatpoly.geometry import Plane, Polygon2D, ring_area
from flatpoly.icosphere import build_refined_icosahedron
from flatpoly.mesh import extract_halfedges_opc, extract_triangles_opc, mesh_from_opc, mesh_from_user
from flatpoly.pipeline import run_scene
from flatpoly.postprocess import PostprocessParams, buffer
from flatpoly.segmentation import SegmentationParams, group_assignment, region_growing_task
from flatpoly.smoothing import BilateralParams, LaplacianParams, laplacian_filter_opc
from flatpoly.synthetic import (
    flat_plane_opc,
    normal_cluster,
    room_scene,
    step_scene,
)


def criterion(number, summary):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {number:2d} FAIL: {summary}")
                raise
            print(f"ACCEPTANCE {number:2d} PASS: {summary}")
        return wrapper
    return deco


@criterion(1, "refined icosahedron matches the published level 0-4 counts, < 1 s")
def test_01_refinement_table():
    t0 = time.perf_counter()
    expected = {0: (12, 20), 1: (42, 80), 2: (162, 320), 3: (642, 1280), 4: (2562, 5120)}
    for level, (nv, nt) in expected.items():
        ico = build_refined_icosahedron(level)
        assert len(ico.vertices) == nv, f"level {level}: {len(ico.vertices)} vertices"
        assert len(ico.triangles) == nt, f"level {level}: {len(ico.triangles)} triangles"
    assert time.perf_counter() - t0 < 1.0


@criterion(2, "level-4 index-prediction error bounds recorded and |bound| <= 64")
def test_02_regression_window():
    ga = build_accumulator(4)
    assert isinstance(ga.window_lo, int) and isinstance(ga.window_hi, int)
    assert ga.window_lo < 0 < ga.window_hi
    # the published S2-curve realization reports [-16, +16]; this curve's
    # bounds are recorded below for comparison and must stay within +/-64
    print(f"  (window bounds [{ga.window_lo}, {ga.window_hi}]; "
          f"published curve reports [-16, +16])")
    assert abs(ga.window_lo) <= 64 and abs(ga.window_hi) <= 64
    pred = ga.model_slope * ga.s2ids.astype(np.float64) + ga.model_intercept
    err = np.arange(ga.num_cells) - pred
    assert ga.window_lo <= err.min() and err.max() <= ga.window_hi


@criterion(3, "cell search agrees with brute force on >= 99.9% of 100k normals, "
              "misses are 1-ring, < 30 s")
def test_03_search_oracle():
    t0 = time.perf_counter()
    ga = build_accumulator(4)
    rng = np.random.default_rng(42)
    q = rng.normal(size=(100_000, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    got = find_cell_indices(ga, q)
    true = np.empty(len(q), dtype=np.int64)
    for s in range(0, len(q), 4000):
        e = min(s + 4000, len(q))
        true[s:e] = np.argmax(q[s:e] @ ga.normals.T, axis=1)
    agree = got == true
    rate = agree.mean()
    assert rate >= 0.999, f"agreement {rate:.5f}"
    for i in np.nonzero(~agree)[0]:
        assert got[i] in ga.neighbors[true[i]], "disagreement beyond the 1-ring"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"{elapsed:.1f} s"
    print(f"  (agreement {rate * 100:.3f}%, {(~agree).sum()} misses, {elapsed:.1f} s)")


@criterion(4, "integrating 100k normals at level 4 takes < 100 ms single-threaded")
def test_04_integration_speed():
    build_accumulator(4)  # structure cache warm, as for the published timing
    rng = np.random.default_rng(7)
    q = rng.normal(size=(100_000, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    # median of repeated runs, as in the published repeated-measurement
    # methodology (a single cold run can pay an allocator page-fault
    # penalty from whatever ran before it)
    samples = []
    for _ in range(5):
        ga = build_accumulator(4)
        t0 = time.perf_counter()
        counts = integrate_normals(ga, q, 1.0)
        samples.append((time.perf_counter() - t0) * 1e3)
        assert counts.sum() == 100_000
    elapsed = float(np.median(samples))
    assert elapsed < 100.0, f"median {elapsed:.1f} ms of {np.round(samples, 1)}"
    print(f"  (integration median {elapsed:.1f} ms over 5 runs; "
          f"published reference 9.1 ms)")


@criterion(5, "half-edge invariants hold on 500 random organized clouds, < 10 s")
def test_05_halfedge_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    for _ in range(500):
        M = int(rng.integers(2, 51))
        N = int(rng.integers(2, 51))
        u, v = np.meshgrid(np.arange(M, dtype=float), np.arange(N, dtype=float),
                           indexing="ij")
        opc = np.stack([v, -u, rng.normal(0, 0.1, (M, N))], axis=2)
        density = rng.uniform(0.0, 0.5)
        opc[rng.random((M, N)) < density] = np.nan

        tris, trimap = extract_triangles_opc(opc)
        he = extract_halfedges_opc(trimap, M, N)

        # twin involution
        has = he >= 0
        e = np.nonzero(has)[0]
        assert np.all(he[he[e]] == e)
        # reversed vertex pairs
        flat = tris.ravel()
        origin = flat[e]
        t_idx, k = np.divmod(e, 3)
        dest = flat[3 * t_idx + (k + 1) % 3]
        tw = he[e]
        tw_t, tw_k = np.divmod(tw, 3)
        assert np.all(flat[tw] == dest)
        assert np.all(flat[3 * tw_t + (tw_k + 1) % 3] == origin)
        # per-quad triangle count oracle
        valid = np.all(np.isfinite(opc), axis=2)
        n_expected = 0
        for uu in range(M - 1):
            for vv in range(N - 1):
                p1 = valid[uu, vv]
                p2 = valid[uu, vv + 1]
                p3 = valid[uu + 1, vv + 1]
                p4 = valid[uu + 1, vv]
                n_expected += int(p1 and p2 and p3) + int(p1 and p3 and p4)
        assert len(tris) == n_expected
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"{elapsed:.1f} s"
    print(f"  (500 grids in {elapsed:.1f} s)")


def room_config(threads=1):
    return PipelineConfig(
        kind="organized",
        laplacian=LaplacianParams(lam=1.0, kernel_size=3, iterations=2),
        bilateral=BilateralParams(sigma_length=0.1, sigma_angle=0.15,
                                  kernel_size=3, iterations=2),
        normals=NormalEstimationParams(level=4, v_min=5.0, d_peak=0.28, sample_pct=0.12),
        segmentation=SegmentationParams(l_max=0.5, ang_min=0.96, ptp_max=0.05,
                                        tri_min=200, vertices_hole_min=6),
        postprocess=PostprocessParams(alpha=0.02, beta_pos=0.0, beta_neg=0.02,
                                      gamma=0.1, delta=0.02),
        threads=threads,
    )


SIGMA = 0.002


@criterion(6, "synthetic room: all 5 planes at 80% overlap, RMSE <= 2 sigma, "
              "floor has exactly the 2 box holes, < 1 s")
def test_06_room_benchmark():
    scene = room_scene(n=250, noise=SIGMA, seed=11)
    cfg = room_config()
    run_scene(cfg, flat_plane_opc(4, 4, 0.05))  # warm caches (structure, kernels)

    t0 = time.perf_counter()
    res = run_scene(cfg, scene.opc)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"{elapsed * 1e3:.0f} ms"

    # the mesh the pipeline segmented (same smoothing path)
    opc_s = laplacian_filter_opc(scene.opc, cfg.laplacian)
    mesh = mesh_from_opc(opc_s)
    labels_flat = scene.labels.ravel()

    for lab, (gt_normal, _) in scene.planes.items():
        gt = np.nonzero(labels_flat == lab)[0]
        gt_set = set(gt.tolist())
        best = None
        for seg in res.segments:
            verts = np.unique(mesh.triangles[seg.triangle_indices])
            inter = len(set(verts.tolist()) & gt_set)
            if best is None or inter > best[0]:
                best = (inter, seg, verts)
        inter, seg, verts = best
        assert inter >= 0.8 * len(verts), f"plane {lab}: segment only {inter}/{len(verts)} pure"
        assert inter >= 0.8 * len(gt), f"plane {lab}: covers only {inter}/{len(gt)} of truth"
        d = (mesh.points[verts] - seg.plane.point) @ seg.plane.normal
        rmse = float(np.sqrt(np.mean(d ** 2)))
        assert rmse <= 2 * SIGMA, f"plane {lab}: rmse {rmse * 1e3:.2f} mm"

    floor_polys = [p for p in res.polygons
                   if abs(p.plane.normal[2]) > 0.9 and abs(p.plane.point[2]) < 0.1]
    assert len(floor_polys) == 1
    holes = floor_polys[0].holes
    assert len(holes) == 2, f"floor has {len(holes)} holes"
    centers_3d = []
    shell3, holes3 = floor_polys[0].lift()
    for h in holes3:
        centers_3d.append(h.mean(axis=0))
    box_centers = [0.5 * (lo + hi) for lo, hi in scene.boxes]
    for c in centers_3d:
        nearest = min(np.linalg.norm(c[:2] - b[:2]) for b in box_centers)
        assert nearest < 0.3, "hole not at a box footprint"
    matched = {int(np.argmin([np.linalg.norm(c[:2] - b[:2]) for b in box_centers]))
               for c in centers_3d}
    assert matched == {0, 1}
    print(f"  (runtime {elapsed * 1e3:.0f} ms, floor holes at both box footprints)")


@criterion(7, "identical polygon multisets for thread counts 1, 2, 4, 8")
def test_07_thread_determinism():
    scene = room_scene(n=250, noise=SIGMA, seed=11)
    signatures = []
    for threads in (1, 2, 4, 8):
        res = run_scene(room_config(threads), scene.opc)
        sig = []
        for p in res.polygons:
            sig.append((tuple(map(tuple, p.shell)),
                        tuple(tuple(map(tuple, h)) for h in p.holes)))
        signatures.append(tuple(sorted(sig)))
    assert all(sig == signatures[0] for sig in signatures[1:])
    assert len(signatures[0]) >= 5
    print(f"  ({len(signatures[0])} polygons, geometry exactly equal across 1/2/4/8 threads)")


@criterion(8, "floor/seat/wall scene: two segments for the shared normal, one wall, "
              "sub-threshold holes absent")
def test_08_disconnected_segments():
    points, triangles, expected = step_scene(hole_quad=True)
    mesh = mesh_from_user(points, triangles)
    dominant = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    params = SegmentationParams(l_max=2.0, ang_min=0.95, ptp_max=0.2, tri_min=5,
                                vertices_hole_min=6)
    groups = group_assignment(mesh, dominant, params.l_max, params.ang_min)
    from flatpoly.polygon import extract_polygon

    up_segs, up_polys, errs = region_growing_task(
        mesh, groups, 0, dominant[0], params, extract_polygon=extract_polygon)
    wall_segs, _, _ = region_growing_task(
        mesh, groups, 1, dominant[1], params, extract_polygon=extract_polygon)
    assert errs == []
    assert len(up_segs) == 2, "floor and seat must be separate segments"
    assert len(wall_segs) == 1
    sizes = sorted(len(s) for s in up_segs)
    assert sizes == sorted([expected["floor"], expected["seat"]])
    floor_poly = up_polys[int(np.argmax([len(s) for s in up_segs]))]
    # the one-quad hole has 4 vertices, below vertices_hole_min = 6
    assert floor_poly.holes == []
    print(f"  (segments: floor {expected['floor']}, seat {expected['seat']}, "
          f"wall {expected['wall']} triangles; 4-vertex hole filtered)")


@criterion(9, "noisy-plane Laplacian: residual strictly decreases for 5 iterations "
              "and ends below half the initial")
def test_09_laplacian_convergence():
    opc = flat_plane_opc(50, 50, spacing=0.05, noise=0.005, seed=13)

    def rms(grid):
        pts = grid.reshape(-1, 3)
        centroid = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - centroid, full_matrices=False)
        return float(np.sqrt(np.mean(((pts - centroid) @ vt[2]) ** 2)))

    residuals = [rms(opc)]
    cur = opc
    for _ in range(5):
        cur = laplacian_filter_opc(cur, LaplacianParams(lam=1.0, kernel_size=3,
                                                        iterations=1))
        residuals.append(rms(cur))
    for a, b in zip(residuals, residuals[1:]):
        assert b < a, f"residual did not decrease: {residuals}"
    assert residuals[-1] < 0.5 * residuals[0]
    print(f"  (residual {residuals[0] * 1e3:.2f} mm -> {residuals[-1] * 1e3:.2f} mm)")


@criterion(10, "unit square buffered +0.5 has area in [3.70, 3.79]")
def test_10_buffer_geometry():
    plane = Plane(normal=[0, 0, 1], point=[0, 0, 0])
    square = Polygon2D(shell=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
                       holes=[], plane=plane)
    out = buffer(square, 0.5)
    assert len(out) == 1
    area = ring_area(out[0].shell)
    # Minkowski sum: area + perimeter * r + pi * r^2 = 1 + 2 + pi/4 = 3.785
    exact = 1.0 + 4.0 * 0.5 + np.pi * 0.25
    assert 3.70 <= area <= 3.79
    assert area <= exact + 1e-9
    print(f"  (area {area:.4f}, closed form {exact:.4f})")


@criterion(11, "two clusters 90 degrees apart give exactly 2 peaks within 1 degree, "
               "chart-border duplicates merged")
def test_11_peak_detection():
    ga = build_accumulator(4)
    pole = np.array([0.0, 0.0, 1.0])
    equator = None
    for v in ga.ico.vertices:
        if abs(v[2]) < 1e-12:
            equator = v
            break
    assert equator is not None and abs(pole @ equator) < 1e-12  # exactly 90 degrees

    rng = np.random.default_rng(3)
    normals = np.vstack([normal_cluster(pole, 500, 2.0, rng),
                         normal_cluster(equator, 500, 2.0, rng)])
    integrate_normals(ga, normals, 1.0)
    raw_n, raw_w = detect_peaks(unwrap_to_image(ga), 1.0)
    assert len(raw_n) > 2, "expected chart-border duplicates before clustering"
    peaks = cluster_peaks(raw_n, raw_w, 0.28)
    assert len(peaks) == 2, f"got {len(peaks)} peaks"
    for center in (pole, equator):
        ang = min(np.degrees(np.arccos(np.clip(n @ center, -1, 1)))
                  for n in peaks.normals)
        assert ang <= 1.0, f"peak {ang:.2f} degrees from its cluster mean"
    print(f"  ({len(raw_n)} raw peaks e.g. pole duplicates -> 2 after clustering)")
