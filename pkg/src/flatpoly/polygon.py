"""Polygon extraction: boundary following over a planar segment's half-edges.

A segment's boundary half-edges (twin absent or outside the segment) form
closed directed cycles with the segment interior on the left.  Walking them
in the segment plane's 2D projection yields the exterior shell (CCW) and the
interior holes (CW).  At junction vertices with several outgoing boundary
edges the walk takes the next edge counter-clockwise from the reversed
incoming direction; this is the planar face-traversal rule, and it keeps the
shell on the outer boundary and each hole on its own cycle even when holes
touch the shell or each other at a vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from flatpoly.geometry import OpenBoundaryError, Plane, Polygon, project_to_plane
from flatpoly.mesh import HalfEdgeMesh


@dataclass
class BoundaryEdgeSet:
    edges: set[int]
    point_to_edges: dict[int, list[int]]


def find_boundary_edges(triangle_indices: np.ndarray, mesh: HalfEdgeMesh) -> BoundaryEdgeSet:
    """Half-edges of segment triangles whose twin is absent or external."""
    triangle_indices = np.asarray(triangle_indices, dtype=np.int64)
    in_segment = np.zeros(mesh.num_triangles, dtype=bool)
    in_segment[triangle_indices] = True
    tri_flat = mesh.triangles.ravel()

    edge_ids = (triangle_indices[:, None] * 3 + np.arange(3, dtype=np.int64)).ravel()
    twins = mesh.halfedges[edge_ids]
    internal = np.zeros(len(edge_ids), dtype=bool)
    has_twin = twins >= 0
    internal[has_twin] = in_segment[twins[has_twin] // 3]
    boundary = np.sort(edge_ids[~internal])

    point_to_edges: dict[int, list[int]] = {}
    for e, origin in zip(boundary.tolist(), tri_flat[boundary].tolist()):
        point_to_edges.setdefault(origin, []).append(e)
    return BoundaryEdgeSet(edges=set(boundary.tolist()), point_to_edges=point_to_edges)


def _ccw_angle(ref: np.ndarray, d: np.ndarray) -> float:
    """Counter-clockwise angle from ref to d in (0, 2*pi]."""
    ang = math.atan2(ref[0] * d[1] - ref[1] * d[0], ref[0] * d[0] + ref[1] * d[1])
    if ang <= 0.0:
        ang += 2.0 * math.pi
    return ang


def _walk_ring(start_edge: int, bes: BoundaryEdgeSet, consumed: set[int],
               coords: dict[int, np.ndarray], origin_of, dest_of,
               max_steps: int) -> list[int]:
    """Follow boundary edges from start_edge until the ring closes.

    At each vertex the outgoing edge with the smallest CCW angle from the
    reversed incoming direction is chosen (ties broken by edge id through the
    sorted candidate lists).
    """
    start_point = origin_of(start_edge)
    ring = [start_point]
    e = start_edge
    steps = 0
    while True:
        if e in consumed:
            raise OpenBoundaryError("boundary walk revisited a consumed edge")
        consumed.add(e)
        o = origin_of(e)
        d = dest_of(e)
        if d == start_point:
            return ring
        ring.append(d)
        steps += 1
        if steps > max_steps:
            raise OpenBoundaryError("boundary walk did not close")
        candidates = [c for c in bes.point_to_edges.get(d, ()) if c not in consumed]
        if not candidates:
            raise OpenBoundaryError("boundary walk reached a dead end")
        if len(candidates) == 1:
            e = candidates[0]
            continue
        ref = coords[o] - coords[d]  # reversed incoming direction
        best = None
        best_ang = math.inf
        for c in candidates:
            out_dir = coords[dest_of(c)] - coords[d]
            ang = _ccw_angle(ref, out_dir)
            if ang < best_ang:
                best = c
                best_ang = ang
        e = best


def extract_polygon(segment, mesh: HalfEdgeMesh, plane: Plane,
                    vertices_hole_min: int) -> Polygon:
    """Shell-plus-holes polygon of a planar segment.

    Only boundary points are projected.  The shell walk starts at the
    projected point with lexicographically largest (x, y); remaining boundary
    cycles become holes unless shorter than ``vertices_hole_min``.
    """
    triangle_indices = getattr(segment, "triangle_indices", segment)
    bes = find_boundary_edges(triangle_indices, mesh)
    tri_flat = mesh.triangles.ravel()

    def origin_of(e: int) -> int:
        return int(tri_flat[e])

    def dest_of(e: int) -> int:
        t, k = divmod(e, 3)
        return int(tri_flat[3 * t + (k + 1) % 3])

    boundary_points = sorted(bes.point_to_edges)
    proj = project_to_plane(mesh.points[boundary_points], plane)
    coords = {p: proj[i] for i, p in enumerate(boundary_points)}

    pi_xp = max(boundary_points, key=lambda p: (coords[p][0], coords[p][1]))

    # the outgoing edge bounding the outer face: next CCW from +x, which
    # points into empty space at the lexicographic extreme
    ref = np.array([1.0, 0.0])
    best = None
    best_ang = math.inf
    for c in bes.point_to_edges[pi_xp]:
        out_dir = coords[dest_of(c)] - coords[pi_xp]
        ang = _ccw_angle(ref, out_dir)
        if ang < best_ang:
            best = c
            best_ang = ang
    if best is None:
        raise OpenBoundaryError("no outgoing boundary edge at the shell start")

    consumed: set[int] = set()
    max_steps = len(bes.edges) + 1
    shell = _walk_ring(best, bes, consumed, coords, origin_of, dest_of, max_steps)

    holes: list[list[int]] = []
    for e in sorted(bes.edges):
        if e in consumed:
            continue
        ring = _walk_ring(e, bes, consumed, coords, origin_of, dest_of, max_steps)
        if len(ring) >= vertices_hole_min:
            holes.append(ring)

    return Polygon(
        shell=np.asarray(shell, dtype=np.int64),
        holes=[np.asarray(h, dtype=np.int64) for h in holes],
        plane=plane,
    )


def polygon_area_2d(ring: np.ndarray) -> float:
    """Signed shoelace area of a projected ring (positive for CCW)."""
    ring = np.asarray(ring, dtype=np.float64)
    if len(ring) < 3:
        raise ValueError("a ring needs at least 3 points")
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
