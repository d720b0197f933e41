"""Refined icosahedron: the spherical histogram's cell structure.

The base icosahedron is oriented with a vertex at each pole (one vertex at +z,
upper ring of five at z = 1/sqrt(5), lower ring offset 36 degrees at
z = -1/sqrt(5), one vertex at -z).  Its 20 faces form five vertical strips of
four faces each; every strip unfolds into a parallelogram "chart" of lattice
shape (2^level + 1) x (2^(level+1) + 1), which is what the 2D unwrap of the
histogram is built from.

Refinement recursively splits each face into four at the edge midpoints and
projects new vertices back onto the unit sphere, deduplicating shared
midpoints.  Level L gives 10*4^L + 2 vertices and 20*4^L triangles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_LEVEL = 7


@dataclass
class RefinedIcosahedron:
    level: int
    vertices: np.ndarray  # (nv, 3) unit vectors
    triangles: np.ndarray  # (nt, 3) vertex indices, CCW from outside
    # chart_lattice[c][(a, b)] = vertex id; a in [0, R], b in [0, 2R], R = 2^level
    chart_lattice: list[dict[tuple[int, int], int]]

    @property
    def cell_normals(self) -> np.ndarray:
        """Unit normals of the triangle cells (normalized centroids)."""
        centroids = self.vertices[self.triangles].mean(axis=1)
        return centroids / np.linalg.norm(centroids, axis=1)[:, None]


def _base_icosahedron() -> tuple[np.ndarray, list[tuple]]:
    h = 1.0 / np.sqrt(5.0)
    c = 2.0 / np.sqrt(5.0)
    verts = [np.array([0.0, 0.0, 1.0])]
    for i in range(5):
        th = 2.0 * np.pi * i / 5.0
        verts.append(np.array([c * np.cos(th), c * np.sin(th), h]))
    for i in range(5):
        th = 2.0 * np.pi * i / 5.0 + np.pi / 5.0
        verts.append(np.array([c * np.cos(th), c * np.sin(th), -h]))
    verts.append(np.array([0.0, 0.0, -1.0]))

    top, bottom = 0, 11
    up = lambda s: 1 + s % 5
    lo = lambda s: 6 + s % 5

    # Four faces per strip s; lattice corners are chart coordinates (a, b)
    # at resolution R = 2^level:
    #   (0,0)=top (R,0)=u_s (0,R)=u_{s+1} (R,R)=l_s (0,2R)=l_{s+1} (R,2R)=bottom
    faces = []
    for s in range(5):
        faces.append((s, (top, (0, 0)), (up(s), (1, 0)), (up(s + 1), (0, 1))))
        faces.append((s, (up(s), (1, 0)), (lo(s), (1, 1)), (up(s + 1), (0, 1))))
        faces.append((s, (up(s + 1), (0, 1)), (lo(s), (1, 1)), (lo(s + 1), (0, 2))))
        faces.append((s, (lo(s), (1, 1)), (bottom, (1, 2)), (lo(s + 1), (0, 2))))
    return np.array(verts), faces


def build_refined_icosahedron(level: int) -> RefinedIcosahedron:
    """Refine the icosahedron ``level`` times (0 <= level <= 7)."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"refinement level must be in [0, {MAX_LEVEL}], got {level}")

    base_verts, base_faces = _base_icosahedron()
    verts: list[np.ndarray] = list(base_verts)
    midpoints: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        m = midpoints.get(key)
        if m is None:
            p = verts[i] + verts[j]
            p = p / np.linalg.norm(p)
            m = len(verts)
            verts.append(p)
            midpoints[key] = m
        return m

    scale = 1 << level
    # Face record: (chart, (v, (a, b)) * 3) with lattice coords at resolution scale.
    faces = [
        (chart, (v0, (a0 * scale, b0 * scale)), (v1, (a1 * scale, b1 * scale)),
         (v2, (a2 * scale, b2 * scale)))
        for chart, (v0, (a0, b0)), (v1, (a1, b1)), (v2, (a2, b2)) in base_faces
    ]

    for _ in range(level):
        next_faces = []
        for chart, (v0, l0), (v1, l1), (v2, l2) in faces:
            m01 = midpoint(v0, v1)
            m12 = midpoint(v1, v2)
            m02 = midpoint(v0, v2)
            l01 = ((l0[0] + l1[0]) // 2, (l0[1] + l1[1]) // 2)
            l12 = ((l1[0] + l2[0]) // 2, (l1[1] + l2[1]) // 2)
            l02 = ((l0[0] + l2[0]) // 2, (l0[1] + l2[1]) // 2)
            next_faces.append((chart, (v0, l0), (m01, l01), (m02, l02)))
            next_faces.append((chart, (v1, l1), (m12, l12), (m01, l01)))
            next_faces.append((chart, (v2, l2), (m02, l02), (m12, l12)))
            next_faces.append((chart, (m01, l01), (m12, l12), (m02, l02)))
        faces = next_faces

    chart_lattice: list[dict[tuple[int, int], int]] = [{} for _ in range(5)]
    triangles = np.empty((len(faces), 3), dtype=np.int64)
    for t, (chart, (v0, l0), (v1, l1), (v2, l2)) in enumerate(faces):
        triangles[t] = (v0, v1, v2)
        lat = chart_lattice[chart]
        lat[l0] = v0
        lat[l1] = v1
        lat[l2] = v2

    return RefinedIcosahedron(
        level=level,
        vertices=np.array(verts),
        triangles=triangles,
        chart_lattice=chart_lattice,
    )


def cell_neighbors(ico: RefinedIcosahedron) -> np.ndarray:
    """1-ring cell adjacency: (nt, 12) matrix of triangle indices, -1 padded.

    Neighbors are the triangles sharing at least one vertex.  At level >= 1
    exactly 60 cells (the five triangles incident to each of the 12 base
    vertices) have 11 neighbors; the rest have 12.
    """
    nt = len(ico.triangles)
    incident: list[list[int]] = [[] for _ in range(len(ico.vertices))]
    for t, tri in enumerate(ico.triangles):
        for v in tri:
            incident[v].append(t)

    out = np.full((nt, 12), -1, dtype=np.int64)
    for t, tri in enumerate(ico.triangles):
        nbrs = set()
        for v in tri:
            nbrs.update(incident[v])
        nbrs.discard(t)
        row = sorted(nbrs)
        out[t, : len(row)] = row
    return out


def vertex_adjacency(ico: RefinedIcosahedron) -> list[set[int]]:
    """Vertex 1-ring adjacency sets (used by the unwrap and the peak oracle)."""
    adj: list[set[int]] = [set() for _ in range(len(ico.vertices))]
    for a, b, c in ico.triangles:
        adj[a].update((b, c))
        adj[b].update((a, c))
        adj[c].update((a, b))
    return adj


def vertex_cell_incidence(ico: RefinedIcosahedron) -> list[list[int]]:
    """For each vertex, the list of triangle cells it belongs to."""
    incident: list[list[int]] = [[] for _ in range(len(ico.vertices))]
    for t, tri in enumerate(ico.triangles):
        for v in tri:
            incident[v].append(t)
    return incident


def unwrap_layout(ico: RefinedIcosahedron) -> np.ndarray:
    """Pixel-to-vertex map of the five-chart unwrapped image.

    The image is (2^(level+1) + 2) rows by 5 * (2^level + 2) columns: five
    chart blocks of 2^level owned pixel columns and 2^(level+1) rows, each
    surrounded by a one-pixel ring of padding that duplicates the
    geometrically adjoining vertices of neighboring charts (or the poles).
    Every vertex except the two poles is owned by exactly one pixel.
    """
    R = 1 << ico.level
    rows = 2 * R + 2
    cols = 5 * (R + 2)
    adj = vertex_adjacency(ico)

    def other_common(v1: int, v2: int, exclude: int) -> int:
        common = (adj[v1] & adj[v2]) - {exclude}
        # closed manifold: every edge has exactly two apex vertices
        (only,) = common
        return only

    img = np.full((rows, cols), -1, dtype=np.int64)
    for c in range(5):
        lat = ico.chart_lattice[c]
        col0 = c * (R + 2)
        # owned block: lattice a in [1, R], b in [0, 2R)
        for a in range(1, R + 1):
            for b in range(0, 2 * R):
                img[1 + b, col0 + a] = lat[(a, b)]
        # west padding is the shared a=0 lattice column (owned by chart c+1)
        for b in range(0, 2 * R):
            img[1 + b, col0] = lat[(0, b)]
        # south padding is the shared b=2R lattice row (owned by chart c-1)
        for a in range(0, R + 1):
            img[1 + 2 * R, col0 + a] = lat[(a, 2 * R)]
        # north padding continues the lattice one row beyond b=0
        for a in range(1, R + 1):
            img[0, col0 + a] = other_common(lat[(a - 1, 0)], lat[(a, 0)], lat[(a - 1, 1)])
        # east padding continues the lattice one column beyond a=R
        for b in range(0, 2 * R):
            img[1 + b, col0 + R + 1] = other_common(
                lat[(R, b)], lat[(R, b + 1)], lat[(R - 1, b + 1)]
            )
        # corner pixels only ever fill the unused diagonal of a 3x3 kernel;
        # copy an adjacent pad vertex, avoiding pole duplicates next to the
        # pole pads (a pole pixel must stay a strict 3x3 maximum when hot)
        img[0, col0] = img[0, col0 + 1]
        img[0, col0 + R + 1] = img[0, col0 + R]
        img[1 + 2 * R, col0 + R + 1] = img[2 * R, col0 + R + 1]

    return img
