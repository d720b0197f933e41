# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Mirrors ``_fallback.py`` operation for operation: integer paths (ids, search,
region growing) are bit-identical; float paths match up to libm/SIMD rounding
differences of about one ulp.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan, exp, fabs, floor, rint, sqrt
from libc.stdint cimport int64_t, uint64_t, uint8_t

cnp.import_array()

cdef int HILBERT_ORDER = 30
cdef int64_t GRID = (<int64_t>1) << 30

# face chain -y, +x, +z, -x, -z, +y (see sfc.py); per face:
# dominant axis, sign, u axis, v axis, swap, neg_u, neg_v
cdef int[6] FACE_AX = [1, 0, 2, 0, 2, 1]
cdef int[6] FACE_U = [0, 1, 0, 1, 0, 0]
cdef int[6] FACE_V = [2, 2, 1, 2, 1, 2]
cdef int[6] FACE_SWAP = [0, 1, 0, 1, 1, 0]
cdef int[6] FACE_NEG_U = [0, 0, 1, 1, 0, 0]
cdef int[6] FACE_NEG_V = [0, 0, 0, 0, 0, 0]
# axis*2 + (sign < 0) -> face index
cdef int[6] FACE_LOOKUP = [1, 3, 5, 0, 2, 4]


cdef inline int64_t _quantize(double t) noexcept nogil:
    t = atan(t) * (4.0 / 3.14159265358979323846)
    cdef int64_t i = <int64_t>floor((t + 1.0) * 0.5 * GRID)
    if i < 0:
        i = 0
    elif i >= GRID:
        i = GRID - 1
    return i


cdef inline uint64_t _hilbert_d(int64_t x, int64_t y) noexcept nogil:
    cdef uint64_t d = 0
    cdef int64_t rx, ry, t
    cdef int64_t s = GRID >> 1
    while s > 0:
        rx = 1 if (x & s) > 0 else 0
        ry = 1 if (y & s) > 0 else 0
        d += (<uint64_t>(s * s)) * <uint64_t>((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            t = x
            x = y
            y = t
        s >>= 1
    return d


cdef inline uint64_t _s2_id(double nx, double ny, double nz) noexcept nogil:
    cdef double norm = sqrt(nx * nx + ny * ny + nz * nz)
    nx = nx / norm
    ny = ny / norm
    nz = nz / norm
    cdef double ax = fabs(nx), ay = fabs(ny), az = fabs(nz)
    cdef int axis = 0
    cdef double best = ax
    if ay > best:
        axis = 1
        best = ay
    if az > best:
        axis = 2
        best = az
    cdef double comp = nx if axis == 0 else (ny if axis == 1 else nz)
    cdef int face = FACE_LOOKUP[axis * 2 + (1 if comp < 0 else 0)]
    cdef double adom = fabs(comp)
    cdef double u, v
    if FACE_U[face] == 0:
        u = nx / adom
    elif FACE_U[face] == 1:
        u = ny / adom
    else:
        u = nz / adom
    if FACE_V[face] == 1:
        v = ny / adom
    else:
        v = nz / adom
    cdef int64_t iu = _quantize(u)
    cdef int64_t iv = _quantize(v)
    cdef int64_t t
    if FACE_SWAP[face]:
        t = iu
        iu = iv
        iv = t
    if FACE_NEG_U[face]:
        iu = GRID - 1 - iu
    if FACE_NEG_V[face]:
        iv = GRID - 1 - iv
    return (<uint64_t>face << 60) | _hilbert_d(iu, iv)


cdef inline int64_t _nearest_in_window(const uint64_t* ids, int64_t lo, int64_t hi,
                                       uint64_t key) noexcept nogil:
    # branchless binary search for the last index with ids[i] <= key
    cdef int64_t n = hi - lo + 1
    cdef int64_t base = lo
    cdef int64_t half
    while n > 1:
        half = n >> 1
        base += half if ids[base + half] <= key else 0
        n -= half
    cdef int64_t cand_lo = base
    cdef int64_t cand_hi = base + 1 if base + 1 <= hi else hi
    cdef uint64_t dl = ids[cand_lo] - key if ids[cand_lo] > key else key - ids[cand_lo]
    cdef uint64_t dh = ids[cand_hi] - key if ids[cand_hi] > key else key - ids[cand_hi]
    return cand_lo if dl <= dh else cand_hi


def find_cells(const double[:, ::1] query_normals, const uint64_t[::1] ids_sorted,
               const double[:, ::1] cell_normals, const int64_t[:, ::1] neighbors,
               double slope, double intercept, int64_t window_lo, int64_t window_hi):
    """See ``_fallback.find_cells``; ids are computed in C here."""
    cdef int64_t n = query_normals.shape[0]
    cdef int64_t n_cells = ids_sorted.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t i, j, k, cand, best, kpred, lo, hi
    cdef uint64_t key
    cdef double qx, qy, qz, dx, dy, dz, d2, best_d2
    with nogil:
        for i in range(n):
            qx = query_normals[i, 0]
            qy = query_normals[i, 1]
            qz = query_normals[i, 2]
            key = _s2_id(qx, qy, qz)
            kpred = <int64_t>rint(slope * <double>key + intercept)
            lo = kpred + window_lo
            hi = kpred + window_hi
            if lo < 0:
                lo = 0
            elif lo > n_cells - 1:
                lo = n_cells - 1
            if hi < 0:
                hi = 0
            elif hi > n_cells - 1:
                hi = n_cells - 1
            j = _nearest_in_window(&ids_sorted[0], lo, hi, key)

            best = j
            dx = cell_normals[j, 0] - qx
            dy = cell_normals[j, 1] - qy
            dz = cell_normals[j, 2] - qz
            best_d2 = dx * dx + dy * dy + dz * dz
            for k in range(12):
                cand = neighbors[j, k]
                if cand < 0:
                    continue
                dx = cell_normals[cand, 0] - qx
                dy = cell_normals[cand, 1] - qy
                dz = cell_normals[cand, 2] - qz
                d2 = dx * dx + dy * dy + dz * dz
                if d2 < best_d2:
                    best = cand
                    best_d2 = d2
            out[i] = best
    return out_arr


def grow_segment(const int64_t[:, ::1] triangles, const int64_t[::1] halfedges,
                 const double[:, ::1] points, const uint8_t[::1] groups,
                 uint8_t[::1] visited, int64_t seed, int64_t label,
                 const double[::1] anchor, const double[::1] normal, double ptp_max):
    """See ``_fallback.grow_segment``; returns the sorted member indices."""
    cdef int64_t nt = triangles.shape[0]
    stack_arr = np.empty(nt, dtype=np.int64)
    members_arr = np.empty(nt, dtype=np.int64)
    cdef int64_t[::1] stack = stack_arr
    cdef int64_t[::1] members = members_arr
    cdef int64_t top = 0, count = 0
    cdef int64_t t, e, twin, cand, v
    cdef int check_ptp = 1 if ptp_max > 0.0 else 0
    cdef int ok, k
    cdef double d
    cdef double ax = anchor[0], ay = anchor[1], az = anchor[2]
    cdef double nx = normal[0], ny = normal[1], nz = normal[2]

    with nogil:
        visited[seed] = 1
        stack[top] = seed
        top += 1
        members[count] = seed
        count += 1
        while top > 0:
            top -= 1
            t = stack[top]
            for e in range(3 * t, 3 * t + 3):
                twin = halfedges[e]
                if twin < 0:
                    continue
                cand = twin / 3
                if groups[cand] != label or visited[cand]:
                    continue
                if check_ptp:
                    ok = 1
                    for k in range(3):
                        v = triangles[cand, k]
                        d = (points[v, 0] - ax) * nx + (points[v, 1] - ay) * ny \
                            + (points[v, 2] - az) * nz
                        if fabs(d) > ptp_max:
                            ok = 0
                            break
                    if not ok:
                        continue
                visited[cand] = 1
                stack[top] = cand
                top += 1
                members[count] = cand
                count += 1
    out = members_arr[:count]
    out.sort()
    return out


def laplacian_filter(const double[:, :, ::1] points, double lam, int kernel_size,
                     int iterations):
    """See ``_fallback.laplacian_filter``."""
    cdef int M = points.shape[0]
    cdef int N = points.shape[1]
    cdef int h = kernel_size // 2
    cur_arr = np.array(points, dtype=np.float64)
    nxt_arr = cur_arr.copy()
    cdef double[:, :, ::1] cur = cur_arr
    cdef double[:, :, ::1] nxt = nxt_arr
    cdef int it, u, v, du, dv, uu, vv
    cdef double wsum, ax, ay, az, dx, dy, dz, dist, w, px, py, pz

    for it in range(iterations):
        with nogil:
            for u in range(1, M - 1):
                for v in range(1, N - 1):
                    px = cur[u, v, 0]
                    py = cur[u, v, 1]
                    pz = cur[u, v, 2]
                    if px != px or py != py or pz != pz:
                        nxt[u, v, 0] = px
                        nxt[u, v, 1] = py
                        nxt[u, v, 2] = pz
                        continue
                    wsum = 0.0
                    ax = ay = az = 0.0
                    for du in range(-h, h + 1):
                        uu = u + du
                        if uu < 0 or uu >= M:
                            continue
                        for dv in range(-h, h + 1):
                            if du == 0 and dv == 0:
                                continue
                            vv = v + dv
                            if vv < 0 or vv >= N:
                                continue
                            dx = cur[uu, vv, 0] - px
                            dy = cur[uu, vv, 1] - py
                            dz = cur[uu, vv, 2] - pz
                            dist = sqrt(dx * dx + dy * dy + dz * dz)
                            if dist != dist or dist <= 0.0:
                                continue
                            w = 1.0 / dist
                            ax += dx * w
                            ay += dy * w
                            az += dz * w
                            wsum += w
                    if wsum > 0.0:
                        nxt[u, v, 0] = px + (lam / wsum) * ax
                        nxt[u, v, 1] = py + (lam / wsum) * ay
                        nxt[u, v, 2] = pz + (lam / wsum) * az
                    else:
                        nxt[u, v, 0] = px
                        nxt[u, v, 1] = py
                        nxt[u, v, 2] = pz
        cur_arr, nxt_arr = nxt_arr, cur_arr
        cur = cur_arr
        nxt = nxt_arr
    return cur_arr


def bilateral_iterate(const double[:, :, :, ::1] centroids,
                      const double[:, :, :, ::1] normals,
                      double sigma_length, double sigma_angle, int kernel_size,
                      int iterations):
    """See ``_fallback.bilateral_iterate``."""
    cdef int Mq = normals.shape[0]
    cdef int Nq = normals.shape[1]
    cdef int h = kernel_size // 2
    cdef double inv2sc = 1.0 / (2.0 * sigma_length * sigma_length)
    cdef double inv2ss = 1.0 / (2.0 * sigma_angle * sigma_angle)
    cur_arr = np.array(normals, dtype=np.float64)
    nxt_arr = cur_arr.copy()
    cdef double[:, :, :, ::1] cur = cur_arr
    cdef double[:, :, :, ::1] nxt = nxt_arr
    cdef int it, u, v, k, du, dv, kk, uu, vv
    cdef double wsum, ax, ay, az, w, dc2, dn2, dx, dy, dz
    cdef double cx, cy, cz, nx, ny, nz, mx, my, mz, norm

    for it in range(iterations):
        with nogil:
            for u in range(Mq):
                for v in range(Nq):
                    for k in range(2):
                        nx = cur[u, v, k, 0]
                        ny = cur[u, v, k, 1]
                        nz = cur[u, v, k, 2]
                        if nx != nx or ny != ny or nz != nz:
                            nxt[u, v, k, 0] = nx
                            nxt[u, v, k, 1] = ny
                            nxt[u, v, k, 2] = nz
                            continue
                        cx = centroids[u, v, k, 0]
                        cy = centroids[u, v, k, 1]
                        cz = centroids[u, v, k, 2]
                        wsum = 0.0
                        ax = ay = az = 0.0
                        for du in range(-h, h + 1):
                            uu = u + du
                            if uu < 0 or uu >= Mq:
                                continue
                            for dv in range(-h, h + 1):
                                vv = v + dv
                                if vv < 0 or vv >= Nq:
                                    continue
                                for kk in range(2):
                                    if du == 0 and dv == 0 and kk == k:
                                        continue
                                    mx = cur[uu, vv, kk, 0]
                                    my = cur[uu, vv, kk, 1]
                                    mz = cur[uu, vv, kk, 2]
                                    if mx != mx or my != my or mz != mz:
                                        continue
                                    dx = centroids[uu, vv, kk, 0] - cx
                                    dy = centroids[uu, vv, kk, 1] - cy
                                    dz = centroids[uu, vv, kk, 2] - cz
                                    dc2 = dx * dx + dy * dy + dz * dz
                                    dx = mx - nx
                                    dy = my - ny
                                    dz = mz - nz
                                    dn2 = dx * dx + dy * dy + dz * dz
                                    w = exp(-dc2 * inv2sc - dn2 * inv2ss)
                                    ax += mx * w
                                    ay += my * w
                                    az += mz * w
                                    wsum += w
                        norm = sqrt(ax * ax + ay * ay + az * az)
                        if wsum > 0.0 and norm > 1e-30:
                            nxt[u, v, k, 0] = ax / norm
                            nxt[u, v, k, 1] = ay / norm
                            nxt[u, v, k, 2] = az / norm
                        else:
                            nxt[u, v, k, 0] = nx
                            nxt[u, v, k, 1] = ny
                            nxt[u, v, k, 2] = nz
        cur_arr, nxt_arr = nxt_arr, cur_arr
        cur = cur_arr
        nxt = nxt_arr
    return cur_arr
