"""Triangle grouping by dominant normal and edge-connected region growing.

Each triangle gets an 8-bit group label (255 = unassigned): triangles whose
longest edge exceeds l_max or whose normal is not within ang_min (dot
product) of the best dominant normal are filtered out.  Per label, unvisited
triangles seed breadth-first segments across twin edges; segments below
tri_min are discarded.  Labels are independent, so one task per label can
run concurrently without shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flatpoly import _kernels
from flatpoly.geometry import Plane
from flatpoly.mesh import HalfEdgeMesh

UNASSIGNED = np.uint8(255)
MAX_GROUPS = 254


@dataclass
class SegmentationParams:
    l_max: float = 0.1            # meters, max triangle edge length
    ang_min: float = 0.95         # min dot(triangle normal, dominant normal)
    ptp_max: float = 0.0          # meters, 0 disables the planarity check
    tri_min: int = 10
    vertices_hole_min: int = 3

    def __post_init__(self):
        if not 0.0 < self.ang_min <= 1.0:
            raise ValueError("ang_min must be in (0, 1]")
        if self.tri_min < 1:
            raise ValueError("tri_min must be >= 1")
        if self.vertices_hole_min < 3:
            raise ValueError("vertices_hole_min must be >= 3")


@dataclass
class PlanarSegment:
    triangle_indices: np.ndarray   # sorted int64
    group: int
    plane: Plane

    def __len__(self) -> int:
        return len(self.triangle_indices)


def group_assignment(mesh: HalfEdgeMesh, dominant_normals: np.ndarray,
                     l_max: float, ang_min: float) -> np.ndarray:
    """Per-triangle group labels (uint8); iteration-order independent."""
    dn = np.atleast_2d(np.asarray(dominant_normals, dtype=np.float64))
    if not 1 <= len(dn) <= MAX_GROUPS:
        raise ValueError(f"need 1..{MAX_GROUPS} dominant normals, got {len(dn)}")

    pts = mesh.points
    tri = mesh.triangles
    a = pts[tri[:, 0]]
    b = pts[tri[:, 1]]
    c = pts[tri[:, 2]]
    edge_max = np.maximum(
        np.linalg.norm(b - a, axis=1),
        np.maximum(np.linalg.norm(c - b, axis=1), np.linalg.norm(a - c, axis=1)),
    )

    sims = mesh.normals @ dn.T
    labels = np.argmax(sims, axis=1).astype(np.uint8)
    best = sims[np.arange(len(tri)), labels]
    labels[~(best >= ang_min)] = UNASSIGNED  # catches NaN normals too
    labels[edge_max > l_max] = UNASSIGNED
    return labels


def extract_planar_segment(seed: int, mesh: HalfEdgeMesh, groups: np.ndarray,
                           dominant_normal: np.ndarray, ptp_max: float,
                           visited: np.ndarray) -> np.ndarray:
    """Edge-connected triangles reachable from ``seed`` within its group.

    The planarity reference plane is anchored at the seed triangle's centroid
    with the dominant normal; ptp_max = 0 disables the check.  Joined
    triangles are marked in ``visited``.
    """
    anchor = mesh.points[mesh.triangles[seed]].mean(axis=0)
    return _kernels.grow_segment(
        mesh.triangles, mesh.halfedges, mesh.points, groups, visited,
        int(seed), int(groups[seed]),
        np.ascontiguousarray(anchor), np.ascontiguousarray(dominant_normal, dtype=np.float64),
        float(ptp_max),
    )


def fit_segment_plane(triangle_indices: np.ndarray, mesh: HalfEdgeMesh,
                      dominant_normal: np.ndarray) -> Plane:
    """Least-squares plane of the segment's unique vertices.

    Centroid plus smallest-eigenvector of the vertex covariance; the normal
    is flipped to align with the dominant normal.  Rank-deficient segments
    fall back to the dominant normal through the centroid.
    """
    pts = mesh.points[np.unique(mesh.triangles[triangle_indices])]
    centroid = pts.mean(axis=0)
    rel = pts - centroid
    cov = rel.T @ rel
    w, v = np.linalg.eigh(cov)
    if w[1] <= max(w[2], 1.0) * 1e-12:
        normal = np.asarray(dominant_normal, dtype=np.float64)
    else:
        normal = v[:, 0]
        if normal @ dominant_normal < 0:
            normal = -normal
    return Plane(normal=normal, point=centroid)


def region_growing_task(mesh: HalfEdgeMesh, groups: np.ndarray, label: int,
                        dominant_normal: np.ndarray, params: SegmentationParams,
                        extract_polygon=None, spawn=None):
    """Grow and collect all segments of one group label (Alg.-style task).

    Seeds are scanned in ascending triangle index; kept segments (size >=
    tri_min) get their plane fitted and, when ``extract_polygon`` is given,
    a polygon extraction call — submitted through ``spawn`` when provided
    (non-blocking task), inline otherwise.  Returns (segments, polygons,
    errors); polygon slots are None for failed extractions, which are
    reported in ``errors`` instead of aborting the remaining segments.
    """
    visited = np.zeros(mesh.num_triangles, dtype=np.uint8)
    dn = np.asarray(dominant_normal, dtype=np.float64)
    segments: list[PlanarSegment] = []
    pending = []

    candidates = np.nonzero(groups == label)[0]
    pos = 0
    while pos < len(candidates):
        # bulk-skip candidates grown into earlier segments
        rel = np.nonzero(visited[candidates[pos:]] == 0)[0]
        if len(rel) == 0:
            break
        seed = int(candidates[pos + rel[0]])
        pos += int(rel[0]) + 1
        members = extract_planar_segment(seed, mesh, groups, dn, params.ptp_max, visited)
        if len(members) < params.tri_min:
            continue
        plane = fit_segment_plane(members, mesh, dn)
        segment = PlanarSegment(triangle_indices=members, group=int(label), plane=plane)
        segments.append(segment)
        if extract_polygon is not None:
            if spawn is not None:
                pending.append(spawn(extract_polygon, segment, mesh, plane,
                                     params.vertices_hole_min))
            else:
                pending.append((extract_polygon, segment, mesh, plane,
                                params.vertices_hole_min))

    polygons = []
    errors = []
    if extract_polygon is not None:
        for i, item in enumerate(pending):
            try:
                if spawn is not None:
                    polygons.append(item.result())
                else:
                    fn, *args = item
                    polygons.append(fn(*args))
            except Exception as exc:  # noqa: BLE001 - reported per segment
                polygons.append(None)
                errors.append((int(label), i, exc))
    return segments, polygons, errors
