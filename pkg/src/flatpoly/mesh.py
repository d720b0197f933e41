"""Mesh front-end: every input kind becomes a half-edge triangle mesh.

* unorganized clouds: 2.5D Delaunay triangulation in the xy projection
* organized clouds: implicit right-cut triangulation of the M x N grid with
  global ids GID = 2*(u*(N-1) + v) + k and a GID -> triangle map
* user meshes: twin edges resolved through a reversed-vertex-pair hashmap

The half-edge convention throughout: triangle t owns half-edges 3t..3t+2,
half-edge 3t+k runs from triangles[t][k] to triangles[t][(k+1) % 3], and
halfedges[e] is the twin of e (-1 on borders).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from flatpoly import delaunay
from flatpoly.geometry import DegenerateInputError, triangle_normals


@dataclass
class HalfEdgeMesh:
    points: np.ndarray              # (n, 3) float64
    triangles: np.ndarray           # (t, 3) int64, CCW against the normal
    halfedges: np.ndarray           # (3t,) int64 twin indices, -1 = border
    normals: np.ndarray = None      # (t, 3) unit normals, NaN when degenerate
    trimap: np.ndarray = None       # GID -> triangle index (-1 = absent), OPC only
    grid_shape: tuple = None        # (M, N) for OPC meshes

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)


def edge_origin(mesh: HalfEdgeMesh, e: int) -> int:
    return int(mesh.triangles[e // 3, e % 3])


def edge_dest(mesh: HalfEdgeMesh, e: int) -> int:
    return int(mesh.triangles[e // 3, (e + 1) % 3])


def gid_of(u: int, v: int, k: int, N: int) -> int:
    """Global id of fully-connected triangle (u, v, k) in an M x N grid."""
    return 2 * (u * (N - 1) + v) + k


def gid_to_uvk(gid: int, N: int) -> tuple[int, int, int]:
    """Inverse of :func:`gid_of`."""
    k = gid & 1
    q = gid >> 1
    return q // (N - 1), q % (N - 1), k


def extract_triangles_opc(opc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-cut triangles of an organized (M, N, 3) cloud plus the GID map.

    Each 2x2 quad with corners p1=(u,v), p2=(u,v+1), p3=(u+1,v+1), p4=(u+1,v)
    yields first triangle {p3, p2, p1} and second {p1, p4, p3}; a triangle is
    emitted iff all three vertices are non-NaN.
    """
    opc = np.asarray(opc, dtype=np.float64)
    if opc.ndim != 3 or opc.shape[0] < 2 or opc.shape[1] < 2:
        raise DegenerateInputError("organized cloud must be at least 2 x 2")
    M, N = opc.shape[:2]
    valid = np.all(np.isfinite(opc), axis=2)

    idx = np.arange(M * N, dtype=np.int64).reshape(M, N)
    p1 = idx[:-1, :-1]
    p2 = idx[:-1, 1:]
    p3 = idx[1:, 1:]
    p4 = idx[1:, :-1]
    v1 = valid[:-1, :-1]
    v2 = valid[:-1, 1:]
    v3 = valid[1:, 1:]
    v4 = valid[1:, :-1]

    first_ok = v1 & v2 & v3
    second_ok = v1 & v3 & v4

    # interleave first/second in GID order: (u, v, k) row-major
    ok = np.stack([first_ok, second_ok], axis=2).ravel()
    trimap = np.where(ok, np.cumsum(ok) - 1, -1).astype(np.int64)

    tris_fc = np.empty((M - 1, N - 1, 2, 3), dtype=np.int64)
    tris_fc[:, :, 0, 0] = p3
    tris_fc[:, :, 0, 1] = p2
    tris_fc[:, :, 0, 2] = p1
    tris_fc[:, :, 1, 0] = p1
    tris_fc[:, :, 1, 1] = p4
    tris_fc[:, :, 1, 2] = p3
    triangles = tris_fc.reshape(-1, 3)[ok]
    return triangles, trimap


def extract_halfedges_opc(trimap: np.ndarray, M: int, N: int) -> np.ndarray:
    """Twin-edge array for the right-cut OPC triangulation.

    Edge linkage per quad: first triangle edges pair with the right quad's
    second (edge 0), the top quad's second (edge 1), and the same quad's
    second (edge 2); second triangle edges mirror this with the left and
    bottom quads.  Any neighbor outside the grid or mapped to -1 stays -1.
    """
    Mq, Nq = M - 1, N - 1
    tm = np.asarray(trimap, dtype=np.int64).reshape(Mq, Nq, 2)
    first = tm[:, :, 0]
    second = tm[:, :, 1]
    n_tri = int(trimap.max()) + 1 if trimap.size else 0
    he = np.full(3 * max(n_tri, 0), -1, dtype=np.int64)

    pad = -np.ones((Mq + 2, Nq + 2), dtype=np.int64)
    pad_first = pad.copy()
    pad_first[1:-1, 1:-1] = first
    pad_second = pad.copy()
    pad_second[1:-1, 1:-1] = second

    right_second = pad_second[1:-1, 2:]
    top_second = pad_second[:-2, 1:-1]
    left_first = pad_first[1:-1, :-2]
    bottom_first = pad_first[2:, 1:-1]

    def link(owners, edge, targets, target_edge):
        ok = (owners >= 0) & (targets >= 0)
        he[owners[ok] * 3 + edge] = targets[ok] * 3 + target_edge

    link(first, 0, right_second, 0)
    link(first, 1, top_second, 1)
    link(first, 2, second, 2)
    link(second, 0, left_first, 0)
    link(second, 1, bottom_first, 1)
    link(second, 2, first, 2)
    return he


def build_halfedges_user(triangles: np.ndarray) -> np.ndarray:
    """Twin edges of a user triangle set via a vertex-pair hashmap.

    When an edge is shared by more than two triangles (a non-two-manifold
    mesh) only the first pair found is linked; the rest stay borders.  Twin
    involution always holds.
    """
    triangles = np.asarray(triangles, dtype=np.int64)
    t = len(triangles)
    he = np.full(3 * t, -1, dtype=np.int64)
    open_edges: dict[tuple[int, int], int] = {}
    for ti in range(t):
        a, b, c = triangles[ti]
        for k, (o, d) in enumerate(((a, b), (b, c), (c, a))):
            e = 3 * ti + k
            twin = open_edges.pop((d, o), None)
            if twin is not None:
                he[e] = twin
                he[twin] = e
            else:
                open_edges.setdefault((o, d), e)
    return he


def compute_normals(mesh: HalfEdgeMesh) -> np.ndarray:
    """Per-triangle unit normals (NaN for degenerate triangles)."""
    return triangle_normals(mesh.points, mesh.triangles)


def mesh_from_opc(opc: np.ndarray) -> HalfEdgeMesh:
    """Organized cloud -> half-edge mesh with normals and GID map."""
    opc = np.asarray(opc, dtype=np.float64)
    triangles, trimap = extract_triangles_opc(opc)
    he = extract_halfedges_opc(trimap, opc.shape[0], opc.shape[1])
    mesh = HalfEdgeMesh(
        points=opc.reshape(-1, 3),
        triangles=triangles,
        halfedges=he,
        trimap=trimap,
        grid_shape=opc.shape[:2],
    )
    mesh.normals = compute_normals(mesh)
    return mesh


def mesh_from_user(points: np.ndarray, triangles: np.ndarray) -> HalfEdgeMesh:
    """User triangle set -> half-edge mesh (assumed consistently oriented)."""
    points = np.asarray(points, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise DegenerateInputError("triangle array must be (t, 3)")
    mesh = HalfEdgeMesh(
        points=points,
        triangles=triangles,
        halfedges=build_halfedges_user(triangles),
    )
    mesh.normals = compute_normals(mesh)
    return mesh


def triangulate_unorganized(cloud: np.ndarray) -> HalfEdgeMesh:
    """2.5D Delaunay triangulation of an unorganized (n, 3) cloud.

    Points are projected to the xy plane and triangulated there with robust
    predicates; triangles are lifted back through the 1:1 point
    correspondence, so they are CCW in the xy projection.  Duplicate xy
    projections beyond the first are dropped from the triangulation (with a
    warning) but the point array keeps its original length.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise DegenerateInputError("unorganized cloud must be (n, 3)")
    if len(cloud) < 3:
        raise DegenerateInputError("need at least 3 points to triangulate")
    if not np.all(np.isfinite(cloud)):
        raise DegenerateInputError("unorganized cloud contains non-finite points")

    xy = cloud[:, :2]
    _, unique_idx = np.unique(xy, axis=0, return_index=True)
    if len(unique_idx) < len(xy):
        warnings.warn(
            f"dropping {len(xy) - len(unique_idx)} duplicate xy projections "
            "before triangulation",
            stacklevel=2,
        )
        unique_idx = np.sort(unique_idx)
        if len(unique_idx) < 3:
            raise DegenerateInputError("fewer than 3 distinct xy projections")
    tri, he = delaunay.triangulate(xy[unique_idx])
    if len(tri) == 0:
        raise DegenerateInputError("all points collinear in the xy projection")
    triangles = unique_idx[tri]  # remap to original point indices

    mesh = HalfEdgeMesh(
        points=cloud,
        triangles=np.ascontiguousarray(triangles, dtype=np.int64),
        halfedges=he,
    )
    mesh.normals = compute_normals(mesh)
    return mesh
