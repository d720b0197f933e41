"""Benchmark the compiled kernels against the pure NumPy fallback.

Both implementations are imported directly (independent of the
FLATPOLY_PURE selection), timed on identical inputs, and checked for
agreement while at it.
"""

from __future__ import annotations

import time

import numpy as np

from flatpoly import _kernels
from flatpoly._kernels import _fallback
from flatpoly.accumulator import build_accumulator
from flatpoly.mesh import mesh_from_opc
from flatpoly.segmentation import group_assignment
from flatpoly.smoothing import compute_fc_triangle_data
from flatpoly.synthetic import flat_plane_opc


def _time(fn, *args, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3, result


def kernel_comparison(seed: int = 0, quick: bool = False) -> str:
    """Run each hot kernel on both backends and format a comparison table.

    ``quick`` shrinks the inputs (used by the test suite).
    """
    if not _kernels.HAVE_NATIVE:
        return ("compiled kernels unavailable (pure NumPy fallback active); "
                "build the extension with: pip install -e . --no-build-isolation")
    from flatpoly._kernels import _native as native

    rng = np.random.default_rng(seed)
    rows = []
    n_queries = 5_000 if quick else 100_000
    grid = 60 if quick else 250

    ga = build_accumulator(4)
    q = rng.normal(size=(n_queries, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    args = (q, ga.s2ids, ga.normals, ga.neighbors,
            ga.model_slope, ga.model_intercept, ga.window_lo, ga.window_hi)
    t_n, r_n = _time(native.find_cells, *args)
    t_f, r_f = _time(_fallback.find_cells, *args)
    rows.append((f"find_cells ({n_queries // 1000}k, level 4)", t_n, t_f,
                 float(np.mean(r_n == r_f))))

    opc = flat_plane_opc(grid, grid, spacing=0.02, noise=0.002, seed=seed)
    t_n, r_n = _time(native.laplacian_filter, opc, 1.0, 3, 2)
    t_f, r_f = _time(_fallback.laplacian_filter, opc, 1.0, 3, 2)
    rows.append((f"laplacian ({grid}x{grid}, 2 it)", t_n, t_f,
                 float(np.nanmax(np.abs(r_n - r_f)) < 1e-9)))

    cents, norms = compute_fc_triangle_data(opc)
    t_n, r_n = _time(native.bilateral_iterate, cents, norms, 0.1, 0.15, 3, 2)
    t_f, r_f = _time(_fallback.bilateral_iterate, cents, norms, 0.1, 0.15, 3, 2)
    rows.append((f"bilateral ({grid}x{grid}, 2 it)", t_n, t_f,
                 float(np.nanmax(np.abs(r_n - r_f)) < 1e-9)))

    mesh = mesh_from_opc(opc)
    groups = group_assignment(mesh, np.array([[0.0, 0.0, 1.0]]), 1.0, 0.9)
    seed_tri = int(np.nonzero(groups == 0)[0][0])
    anchor = mesh.points[mesh.triangles[seed_tri]].mean(axis=0)
    up = np.array([0.0, 0.0, 1.0])

    def run_grow(impl):
        visited = np.zeros(mesh.num_triangles, dtype=np.uint8)
        return impl.grow_segment(mesh.triangles, mesh.halfedges, mesh.points,
                                 groups, visited, seed_tri, 0, anchor, up, 0.05)

    t_n, r_n = _time(run_grow, native)
    t_f, r_f = _time(run_grow, _fallback)
    rows.append((f"grow_segment ({mesh.num_triangles // 1000}k tris)", t_n, t_f,
                 float(np.array_equal(r_n, r_f))))

    lines = ["kernel backend comparison (best of 3):"]
    lines.append(f"  {'kernel':<28} {'native':>10} {'python':>10} {'speedup':>8}  agree")
    for name, t_n, t_f, agree in rows:
        lines.append(f"  {name:<28} {t_n:>8.1f}ms {t_f:>8.1f}ms {t_f / t_n:>7.1f}x  {agree:.4f}")
    return "\n".join(lines)
