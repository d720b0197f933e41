"""Pure NumPy implementations of the hot kernels.

These are the reference semantics; the Cython module in ``_native.pyx``
mirrors them operation for operation.
"""

from __future__ import annotations

import numpy as np

from flatpoly import sfc


def find_cells(query_normals, ids_sorted, cell_normals, neighbors,
               slope, intercept, window_lo, window_hi):
    """Histogram cell index for each query normal (rows must be unit, finite).

    Predicts an index from the regression line, picks the nearest id inside
    the clamped window, then returns the candidate among that cell and its
    <=12 neighbors whose surface normal is closest to the query (strict <
    keeps the earlier candidate on ties).
    """
    qn = np.ascontiguousarray(query_normals, dtype=np.float64)
    q = sfc.s2_id(qn)
    n_cells = len(ids_sorted)
    kpred = np.rint(slope * q.astype(np.float64) + intercept).astype(np.int64)
    lo = np.clip(kpred + window_lo, 0, n_cells - 1)
    hi = np.clip(kpred + window_hi, 0, n_cells - 1)
    # clipping into [lo, hi] makes this equivalent to a search restricted to
    # the window (the window provably brackets the insertion point)
    ins = np.searchsorted(ids_sorted, q)
    cand_hi = np.clip(ins, lo, hi)
    cand_lo = np.clip(ins - 1, lo, hi)
    dh = np.where(ids_sorted[cand_hi] > q, ids_sorted[cand_hi] - q, q - ids_sorted[cand_hi])
    dl = np.where(ids_sorted[cand_lo] > q, ids_sorted[cand_lo] - q, q - ids_sorted[cand_lo])
    j = np.where(dl <= dh, cand_lo, cand_hi)

    cand = np.concatenate([j[:, None], neighbors[j]], axis=1)  # (n, 13)
    valid = cand >= 0
    diff = cell_normals[np.where(valid, cand, 0)] - qn[:, None, :]
    d2 = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2]
    d2[~valid] = np.inf
    best = np.argmin(d2, axis=1)
    return cand[np.arange(len(qn)), best]


def grow_segment(triangles, halfedges, points, groups, visited,
                 seed, label, anchor, normal, ptp_max):
    """Breadth-first region growing across twin edges from a seed triangle.

    A neighbor joins when it carries the same label, is unvisited, and (for
    ptp_max > 0) all three of its vertices lie within ptp_max of the plane
    through ``anchor`` with ``normal``.  Only joined triangles are marked
    visited; rejected ones stay eligible as future seeds.  Returns the sorted
    member indices.
    """
    check_ptp = ptp_max > 0.0
    visited[seed] = 1
    frontier = np.array([seed], dtype=np.int64)
    waves = [frontier]
    edge_off = np.arange(3, dtype=np.int64)
    while frontier.size:
        edges = (frontier[:, None] * 3 + edge_off).ravel()
        twins = halfedges[edges]
        cand = twins[twins >= 0] // 3
        cand = cand[(groups[cand] == label) & (visited[cand] == 0)]
        if cand.size == 0:
            break
        cand = np.unique(cand)
        if check_ptp:
            tri_pts = points[triangles[cand]]  # (k, 3, 3)
            dist = np.abs((tri_pts - anchor) @ normal)
            cand = cand[np.all(dist <= ptp_max, axis=1)]
            if cand.size == 0:
                break
        visited[cand] = 1
        waves.append(cand)
        frontier = cand
    return np.sort(np.concatenate(waves))


def laplacian_filter(points, lam, kernel_size, iterations):
    """Inverse-distance-weighted Laplacian smoothing of an organized grid.

    Interior vertices move by lam/W * sum w_j (v_j - v_i) with w_j the
    inverse neighbor distance over the valid kernel-window neighbors; the
    outermost image-space ring and NaN vertices are left untouched.
    """
    pts = np.array(points, dtype=np.float64)
    M, N = pts.shape[:2]
    h = kernel_size // 2
    for _ in range(iterations):
        src = pts
        pad = np.full((M + 2 * h, N + 2 * h, 3), np.nan)
        pad[h:h + M, h:h + N] = src
        wsum = np.zeros((M, N))
        acc = np.zeros((M, N, 3))
        for du in range(-h, h + 1):
            for dv in range(-h, h + 1):
                if du == 0 and dv == 0:
                    continue
                nb = pad[h + du:h + du + M, h + dv:h + dv + N]
                diff = nb - src
                dist = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2)
                ok = np.isfinite(dist) & (dist > 0)
                w = np.where(ok, 1.0 / np.where(ok, dist, 1.0), 0.0)
                acc += np.where(ok[..., None], diff, 0.0) * w[..., None]
                wsum += w
        out = src.copy()
        upd = (wsum > 0) & np.all(np.isfinite(src), axis=2)
        out[upd] += (lam / wsum[upd])[:, None] * acc[upd]
        out[0, :] = src[0, :]
        out[-1, :] = src[-1, :]
        out[:, 0] = src[:, 0]
        out[:, -1] = src[:, -1]
        pts = out
    return pts


def bilateral_iterate(centroids, normals, sigma_length, sigma_angle,
                      kernel_size, iterations):
    """Edge-preserving normal smoothing on the fully-connected triangle grid.

    Each triangle's normal becomes the weight-normalized sum of its kernel
    window neighbors' normals (both split triangles of every window quad,
    excluding itself), weighted by Gaussian falloffs in centroid distance and
    normal difference, then renormalized to unit length.  NaN triangles stay
    NaN and never contribute.
    """
    Mq, Nq = normals.shape[:2]
    h = kernel_size // 2
    inv2sc = 1.0 / (2.0 * sigma_length * sigma_length)
    inv2ss = 1.0 / (2.0 * sigma_angle * sigma_angle)

    padc = np.full((Mq + 2 * h, Nq + 2 * h, 2, 3), np.nan)
    padc[h:h + Mq, h:h + Nq] = centroids
    cur = np.array(normals, dtype=np.float64)

    for _ in range(iterations):
        padn = np.full((Mq + 2 * h, Nq + 2 * h, 2, 3), np.nan)
        padn[h:h + Mq, h:h + Nq] = cur
        acc = np.zeros_like(cur)
        wsum = np.zeros((Mq, Nq, 2))
        for du in range(-h, h + 1):
            for dv in range(-h, h + 1):
                for kk in range(2):
                    nb_n = padn[h + du:h + du + Mq, h + dv:h + dv + Nq, kk]
                    nb_c = padc[h + du:h + du + Mq, h + dv:h + dv + Nq, kk]
                    for k in range(2):
                        if du == 0 and dv == 0 and kk == k:
                            continue
                        dc = nb_c - centroids[:, :, k]
                        dn = nb_n - cur[:, :, k]
                        dc2 = dc[..., 0] ** 2 + dc[..., 1] ** 2 + dc[..., 2] ** 2
                        dn2 = dn[..., 0] ** 2 + dn[..., 1] ** 2 + dn[..., 2] ** 2
                        w = np.exp(-dc2 * inv2sc - dn2 * inv2ss)
                        ok = np.isfinite(w)
                        w = np.where(ok, w, 0.0)
                        acc[:, :, k] += np.where(ok[..., None], nb_n, 0.0) * w[..., None]
                        wsum[:, :, k] += w
        norm = np.sqrt(acc[..., 0] ** 2 + acc[..., 1] ** 2 + acc[..., 2] ** 2)
        ok = (wsum > 0) & (norm > 1e-30) & np.all(np.isfinite(cur), axis=3)
        nxt = cur.copy()
        nxt[ok] = acc[ok] / norm[ok][:, None]
        cur = nxt
    return cur
