"""2D Delaunay triangulation with robust geometric predicates.

Incremental sweep-hull construction: points are sorted by distance from the
seed triangle's circumcenter and stitched onto an advancing convex hull, with
flips restoring the Delaunay condition.  Orientation and in-circle tests use
a floating-point filter with Shewchuk-style error bounds and fall back to
exact rational arithmetic when the filter cannot decide, so degenerate and
near-degenerate inputs are handled correctly.

Output matches the package's half-edge convention: a flat CCW triangle array
and a twin-edge array where ``halfedges[e]`` is the opposite half-edge of
``e`` (-1 on the hull).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# floating-point filter constants (epsilon = 2^-53)
_EPS = 7.4505805969238281e-09  # sqrt of 2^-52, near-duplicate snap distance
_CCW_ERR = 3.3306690738754716e-16
_ICC_ERR = 1.1102230246251565e-15


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (ax, ay, bx, by, cx, cy))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient2d(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the (a, b, c) orientation: +1 CCW, -1 CW, 0 collinear (exact)."""
    l = (ax - cx) * (by - cy)
    r = (ay - cy) * (bx - cx)
    det = l - r
    if abs(det) >= _CCW_ERR * (abs(l) + abs(r)):
        return 1 if det > 0 else -1
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _incircle_exact(ax, ay, bx, by, cx, cy, px, py) -> int:
    ax, ay, bx, by, cx, cy, px, py = (
        Fraction(v) for v in (ax, ay, bx, by, cx, cy, px, py)
    )
    dx, dy = ax - px, ay - py
    ex, ey = bx - px, by - py
    fx, fy = cx - px, cy - py
    ap = dx * dx + dy * dy
    bp = ex * ex + ey * ey
    cp = fx * fx + fy * fy
    det = dx * (ey * cp - bp * fy) - dy * (ex * cp - bp * fx) + ap * (ex * fy - ey * fx)
    return (det > 0) - (det < 0)


def incircle_sign(ax, ay, bx, by, cx, cy, px, py) -> int:
    """Sign of the in-circle determinant: -1 when p is strictly inside the
    circumcircle of clockwise (a, b, c), +1 strictly outside, 0 cocircular."""
    dx, dy = ax - px, ay - py
    ex, ey = bx - px, by - py
    fx, fy = cx - px, cy - py
    ap = dx * dx + dy * dy
    bp = ex * ex + ey * ey
    cp = fx * fx + fy * fy
    det = dx * (ey * cp - bp * fy) - dy * (ex * cp - bp * fx) + ap * (ex * fy - ey * fx)
    permanent = (
        (abs(ey * cp) + abs(bp * fy)) * abs(dx)
        + (abs(ex * cp) + abs(bp * fx)) * abs(dy)
        + (abs(ex * fy) + abs(ey * fx)) * ap
    )
    if abs(det) > _ICC_ERR * permanent:
        return 1 if det > 0 else -1
    return _incircle_exact(ax, ay, bx, by, cx, cy, px, py)


def incircle_strict(ax, ay, bx, by, cx, cy, px, py) -> bool:
    """True iff p lies strictly inside the circumcircle of CCW (a, b, c)."""
    return incircle_sign(ax, ay, bx, by, cx, cy, px, py) > 0


def _circumradius2(ax, ay, bx, by, cx, cy) -> float:
    dx, dy = bx - ax, by - ay
    ex, ey = cx - ax, cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    d = dx * ey - dy * ex
    if d == 0.0:
        return math.inf
    half = 0.5 / d
    x = (ey * bl - dy * cl) * half
    y = (dx * cl - ex * bl) * half
    return x * x + y * y


def _circumcenter(ax, ay, bx, by, cx, cy) -> tuple[float, float]:
    dx, dy = bx - ax, by - ay
    ex, ey = cx - ax, cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    half = 0.5 / (dx * ey - dy * ex)
    return ax + (ey * bl - dy * cl) * half, ay + (dx * cl - ex * bl) * half


def _pseudo_angle(dx: float, dy: float) -> float:
    # monotone with true angle, cheaper than atan2
    p = dx / (abs(dx) + abs(dy))
    return (3.0 - p) / 4.0 if dy > 0 else (1.0 + p) / 4.0


class _Triangulator:
    def __init__(self, coords: np.ndarray):
        self.x = coords[:, 0]
        self.y = coords[:, 1]
        n = len(coords)
        max_tri = max(2 * n - 5, 0)
        self.triangles = np.empty(3 * max_tri, dtype=np.int64)
        self.halfedges = np.empty(3 * max_tri, dtype=np.int64)
        self.tri_len = 0
        self.hash_size = math.ceil(math.sqrt(n))
        self.hull_prev = np.zeros(n, dtype=np.int64)
        self.hull_next = np.zeros(n, dtype=np.int64)
        self.hull_tri = np.zeros(n, dtype=np.int64)
        self.hull_hash = np.full(self.hash_size, -1, dtype=np.int64)
        self.edge_stack = np.zeros(512, dtype=np.int64)

    def _ccw(self, i, j, k) -> bool:
        return orient2d(self.x[i], self.y[i], self.x[j], self.y[j], self.x[k], self.y[k]) > 0

    def _hash_key(self, px, py) -> int:
        return math.floor(_pseudo_angle(px - self.cx, py - self.cy) * self.hash_size) % self.hash_size

    def run(self) -> bool:
        """Triangulate; returns False when all points are collinear."""
        x, y = self.x, self.y
        n = len(x)

        cx = (x.min() + x.max()) / 2
        cy = (y.min() + y.max()) / 2
        i0 = int(np.argmin((x - cx) ** 2 + (y - cy) ** 2))
        d0 = (x - x[i0]) ** 2 + (y - y[i0]) ** 2
        d0[i0] = np.inf
        i1 = int(np.argmin(d0))

        min_r = math.inf
        i2 = -1
        for i in range(n):
            if i == i0 or i == i1:
                continue
            r = _circumradius2(x[i0], y[i0], x[i1], y[i1], x[i], y[i])
            if r < min_r:
                i2 = i
                min_r = r
        if not math.isfinite(min_r):
            return False

        if self._ccw(i0, i1, i2):
            i1, i2 = i2, i1  # store the seed clockwise (flipped back on output)

        self.cx, self.cy = _circumcenter(x[i0], y[i0], x[i1], y[i1], x[i2], y[i2])
        order = np.argsort((x - self.cx) ** 2 + (y - self.cy) ** 2, kind="stable")

        hull_prev, hull_next, hull_tri = self.hull_prev, self.hull_next, self.hull_tri
        self.hull_start = i0
        hull_next[i0] = hull_prev[i2] = i1
        hull_next[i1] = hull_prev[i0] = i2
        hull_next[i2] = hull_prev[i1] = i0
        hull_tri[i0] = 0
        hull_tri[i1] = 1
        hull_tri[i2] = 2
        self.hull_hash[self._hash_key(x[i0], y[i0])] = i0
        self.hull_hash[self._hash_key(x[i1], y[i1])] = i1
        self.hull_hash[self._hash_key(x[i2], y[i2])] = i2

        hull_size = 3
        self._add_triangle(i0, i1, i2, -1, -1, -1)

        xp = yp = math.nan
        for k in range(n):
            i = int(order[k])
            if i == i0 or i == i1 or i == i2:
                continue
            xi, yi = x[i], y[i]
            if abs(xi - xp) <= _EPS and abs(yi - yp) <= _EPS:
                continue  # near-duplicate of the previous point
            xp, yp = xi, yi

            # find a visible hull edge using the angular hash
            start = 0
            key = self._hash_key(xi, yi)
            for j in range(self.hash_size):
                start = int(self.hull_hash[(key + j) % self.hash_size])
                if start != -1 and start != hull_next[start]:
                    break
            start = int(hull_prev[start])
            e = start
            while True:
                q = int(hull_next[e])
                if self._ccw(i, e, q):
                    break
                e = q
                if e == start:
                    e = -1
                    break
            if e == -1:
                continue  # a near-duplicate on the hull

            t = self._add_triangle(e, i, int(hull_next[e]), -1, -1, int(hull_tri[e]))
            hull_tri[i] = self._legalize(t + 2)
            hull_tri[e] = t
            hull_size += 1

            # walk forward filling in visible edges
            nxt = int(hull_next[e])
            while True:
                q = int(hull_next[nxt])
                if not self._ccw(i, nxt, q):
                    break
                t = self._add_triangle(nxt, i, q, int(hull_tri[i]), -1, int(hull_tri[nxt]))
                hull_tri[i] = self._legalize(t + 2)
                hull_next[nxt] = nxt  # removed from the hull
                hull_size -= 1
                nxt = q

            # walk backward from the other side
            if e == start:
                while True:
                    q = int(hull_prev[e])
                    if not self._ccw(i, q, e):
                        break
                    t = self._add_triangle(q, i, e, -1, int(hull_tri[e]), int(hull_tri[q]))
                    self._legalize(t + 2)
                    hull_tri[q] = t
                    hull_next[e] = e  # removed from the hull
                    hull_size -= 1
                    e = q

            self.hull_start = hull_prev[i] = e
            hull_next[e] = hull_prev[nxt] = i
            hull_next[i] = nxt
            self.hull_hash[self._hash_key(xi, yi)] = i
            self.hull_hash[self._hash_key(x[e], y[e])] = e

        self.triangles = self.triangles[: self.tri_len]
        self.halfedges = self.halfedges[: self.tri_len]
        return True

    def _link(self, a: int, b: int):
        self.halfedges[a] = b
        if b != -1:
            self.halfedges[b] = a

    def _add_triangle(self, i0, i1, i2, a, b, c) -> int:
        t = self.tri_len
        self.triangles[t] = i0
        self.triangles[t + 1] = i1
        self.triangles[t + 2] = i2
        self._link(t, a)
        self._link(t + 1, b)
        self._link(t + 2, c)
        self.tri_len += 3
        return t

    def _legalize(self, a: int) -> int:
        x, y = self.x, self.y
        triangles, halfedges = self.triangles, self.halfedges
        stack = self.edge_stack
        top = 0
        ar = 0
        while True:
            b = int(halfedges[a])
            a0 = a - a % 3
            ar = a0 + (a + 2) % 3
            if b == -1:
                if top == 0:
                    break
                top -= 1
                a = int(stack[top])
                continue

            b0 = b - b % 3
            al = a0 + (a + 1) % 3
            bl = b0 + (b + 2) % 3
            p0 = int(triangles[ar])
            pr = int(triangles[a])
            pl = int(triangles[al])
            p1 = int(triangles[bl])

            # triangles are clockwise at this stage, so inside = negative sign
            if incircle_sign(x[p0], y[p0], x[pr], y[pr], x[pl], y[pl], x[p1], y[p1]) < 0:
                triangles[a] = p1
                triangles[b] = p0
                hbl = int(halfedges[bl])
                if hbl == -1:
                    # the flipped edge reached the hull from the other side
                    e = self.hull_start
                    while True:
                        if int(self.hull_tri[e]) == bl:
                            self.hull_tri[e] = a
                            break
                        e = int(self.hull_prev[e])
                        if e == self.hull_start:
                            break
                self._link(a, hbl)
                self._link(b, int(halfedges[ar]))
                self._link(ar, bl)
                br = b0 + (b + 1) % 3
                if top < len(stack):
                    stack[top] = br
                    top += 1
            else:
                if top == 0:
                    break
                top -= 1
                a = int(stack[top])
        return ar


def triangulate(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Delaunay-triangulate 2D points.

    Returns (triangles, halfedges): triangles is (t, 3) int64 with CCW vertex
    order, halfedges is the flat twin array.  Both are empty when every point
    is collinear.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2 or len(coords) < 3:
        raise ValueError("need an (n, 2) array with n >= 3")
    tr = _Triangulator(coords)
    if not tr.run():
        return np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64)
    tri = tr.triangles.reshape(-1, 3)
    he = tr.halfedges

    # the sweep builds clockwise triangles in y-up coordinates; swapping the
    # last two vertices of every triangle makes them CCW, and the twin array
    # is remapped to match (edge k of t becomes edge 2-k reversed)
    tri = tri[:, [0, 2, 1]]
    e = np.arange(len(he), dtype=np.int64)
    perm = (e // 3) * 3 + (2 - e % 3)
    he_sw = np.full_like(he, -1)
    valid = he >= 0
    he_sw[perm[valid]] = perm[he[valid]]
    return np.ascontiguousarray(tri), he_sw
