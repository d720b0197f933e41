import numpy as np
import pytest
from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon

from flatpoly.geometry import Plane, project_to_plane
from flatpoly.mesh import mesh_from_opc, mesh_from_user
from flatpoly.polygon import extract_polygon, find_boundary_edges, polygon_area_2d
from flatpoly.synthetic import flat_plane_opc

UP_PLANE = Plane(normal=[0.0, 0.0, 1.0], point=[0.0, 0.0, 0.0])


def cycle_decomposition_oracle(bes, mesh):
    """Decompose boundary edges into cycles by pure successor-following.

    Works when every boundary point has exactly one outgoing edge (no
    pinch vertices); used to cross-check ring extraction.
    """
    tri_flat = mesh.triangles.ravel()

    def dest(e):
        t, k = divmod(e, 3)
        return int(tri_flat[3 * t + (k + 1) % 3])

    out = {}
    for e in bes.edges:
        o = int(tri_flat[e])
        assert o not in out, "oracle requires single outgoing edges"
        out[o] = e
    cycles = []
    remaining = set(bes.edges)
    while remaining:
        e = min(remaining)
        cyc = []
        while e in remaining:
            remaining.discard(e)
            cyc.append(e)
            e = out[dest(e)]
        cycles.append(cyc)
    return cycles


class TestBoundaryEdges:
    def test_single_triangle(self):
        mesh = mesh_from_user(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float),
                              np.array([[0, 1, 2]]))
        bes = find_boundary_edges(np.array([0]), mesh)
        assert bes.edges == {0, 1, 2}
        cycles = cycle_decomposition_oracle(bes, mesh)
        assert len(cycles) == 1 and len(cycles[0]) == 3

    def test_two_triangle_square(self):
        mesh = mesh_from_opc(flat_plane_opc(2, 2, spacing=1.0))
        bes = find_boundary_edges(np.array([0, 1]), mesh)
        assert len(bes.edges) == 4
        cycles = cycle_decomposition_oracle(bes, mesh)
        assert len(cycles) == 1 and len(cycles[0]) == 4

    def test_annulus_two_cycles(self):
        opc = flat_plane_opc(6, 6, spacing=1.0)
        opc[2, 2] = np.nan
        mesh = mesh_from_opc(opc)
        seg = np.arange(mesh.num_triangles)
        bes = find_boundary_edges(seg, mesh)
        cycles = cycle_decomposition_oracle(bes, mesh)
        assert len(cycles) == 2
        assert sorted(len(c) for c in cycles) == [6, 20]

    def test_interior_edge_excluded(self):
        mesh = mesh_from_opc(flat_plane_opc(3, 3, spacing=1.0))
        seg = np.arange(mesh.num_triangles)
        bes = find_boundary_edges(seg, mesh)
        internal = 3 * mesh.num_triangles - len(bes.edges)
        assert internal == 2 * ((mesh.halfedges >= 0).sum() // 2)

    def test_in_out_degree_balance(self):
        opc = flat_plane_opc(7, 7, spacing=1.0)
        opc[3, 3] = np.nan
        mesh = mesh_from_opc(opc)
        bes = find_boundary_edges(np.arange(mesh.num_triangles), mesh)
        tri_flat = mesh.triangles.ravel()
        out_deg = {}
        in_deg = {}
        for e in bes.edges:
            t, k = divmod(e, 3)
            out_deg[tri_flat[e]] = out_deg.get(tri_flat[e], 0) + 1
            d = tri_flat[3 * t + (k + 1) % 3]
            in_deg[d] = in_deg.get(d, 0) + 1
        assert out_deg == in_deg


class TestExtractPolygon:
    def test_single_triangle(self):
        mesh = mesh_from_user(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float),
                              np.array([[0, 1, 2]]))
        poly = extract_polygon(np.array([0]), mesh, UP_PLANE, 3)
        assert len(poly.shell) == 3
        assert poly.holes == []

    def test_square_with_hole(self):
        opc = flat_plane_opc(6, 6, spacing=1.0)
        opc[2, 2] = np.nan
        mesh = mesh_from_opc(opc)
        poly = extract_polygon(np.arange(mesh.num_triangles), mesh, UP_PLANE, 3)
        assert len(poly.shell) == 20
        assert len(poly.holes) == 1 and len(poly.holes[0]) == 6
        shell2 = project_to_plane(mesh.points[poly.shell], poly.plane)
        hole2 = project_to_plane(mesh.points[poly.holes[0]], poly.plane)
        assert polygon_area_2d(shell2) > 0   # shell CCW
        assert polygon_area_2d(hole2) < 0    # holes CW
        # every hole point strictly inside the shell
        shp = ShapelyPolygon(shell2)
        for p in hole2:
            assert shp.contains(Point(p))

    def test_hole_filtered_by_threshold(self):
        opc = flat_plane_opc(6, 6, spacing=1.0)
        opc[2, 2] = np.nan
        mesh = mesh_from_opc(opc)
        poly = extract_polygon(np.arange(mesh.num_triangles), mesh, UP_PLANE, 10)
        assert len(poly.shell) == 20
        assert poly.holes == []

    def test_every_boundary_edge_consumed_once(self):
        opc = flat_plane_opc(8, 8, spacing=1.0)
        opc[2, 2] = np.nan
        opc[5, 5] = np.nan
        mesh = mesh_from_opc(opc)
        seg = np.arange(mesh.num_triangles)
        bes = find_boundary_edges(seg, mesh)
        poly = extract_polygon(seg, mesh, UP_PLANE, 3)
        ring_points = len(poly.shell) + sum(len(h) for h in poly.holes)
        assert ring_points <= len(bes.edges)
        assert len(poly.holes) == 2

    def test_rerun_is_identical(self):
        opc = flat_plane_opc(7, 9, spacing=0.5, noise=0.01, seed=6)
        opc[3, 4] = np.nan
        mesh = mesh_from_opc(opc)
        seg = np.arange(mesh.num_triangles)
        a = extract_polygon(seg, mesh, UP_PLANE, 3)
        b = extract_polygon(seg, mesh, UP_PLANE, 3)
        assert np.array_equal(a.shell, b.shell)
        assert len(a.holes) == len(b.holes)
        for ha, hb in zip(a.holes, b.holes):
            assert np.array_equal(ha, hb)

    def test_shell_starts_at_lexicographic_max(self):
        mesh = mesh_from_opc(flat_plane_opc(4, 4, spacing=1.0))
        poly = extract_polygon(np.arange(mesh.num_triangles), mesh, UP_PLANE, 3)
        coords = project_to_plane(mesh.points[poly.shell], poly.plane)
        start = coords[0]
        best = max(map(tuple, coords))
        assert tuple(start) == best

    def test_hole_touching_shell_at_pinch_vertex(self):
        # a hole sharing one vertex with the exterior boundary: the shell
        # walk must continue along the outer boundary at the junction and
        # the hole must come out as its own ring
        pts = np.array([
            [0.0, 0.0, 0.0],   # 0
            [2.0, 0.0, 0.0],   # 1  pinch vertex on the bottom edge
            [4.0, 0.0, 0.0],   # 2
            [4.0, 4.0, 0.0],   # 3
            [0.0, 4.0, 0.0],   # 4
            [1.5, 1.0, 0.0],   # 5  hole corner
            [2.5, 1.0, 0.0],   # 6  hole corner
        ])
        tris = np.array([
            [0, 1, 5], [1, 2, 6], [2, 3, 6], [6, 3, 5], [5, 3, 4], [0, 5, 4],
        ])
        mesh = mesh_from_user(pts, tris)
        poly = extract_polygon(np.arange(len(tris)), mesh, UP_PLANE, 3)
        assert sorted(poly.shell.tolist()) == [0, 1, 2, 3, 4]
        assert len(poly.shell) == 5  # the pinch vertex appears exactly once
        assert len(poly.holes) == 1
        assert sorted(poly.holes[0].tolist()) == [1, 5, 6]
        shell2 = project_to_plane(mesh.points[poly.shell], poly.plane)
        hole2 = project_to_plane(mesh.points[poly.holes[0]], poly.plane)
        assert polygon_area_2d(shell2) > 0
        assert polygon_area_2d(hole2) < 0


class TestPolygonArea:
    def test_unit_square_ccw(self):
        ring = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert polygon_area_2d(ring) == pytest.approx(1.0)

    def test_unit_square_cw(self):
        ring = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=float)
        assert polygon_area_2d(ring) == pytest.approx(-1.0)

    def test_monte_carlo_oracle(self, rng):
        # random star-shaped simple ring vs point-in-polygon sampling
        th = np.sort(rng.uniform(0, 2 * np.pi, 12))
        r = rng.uniform(0.5, 1.5, 12)
        ring = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        area = polygon_area_2d(ring)
        shp = ShapelyPolygon(ring)
        n = 200_000
        pts = rng.uniform(-1.6, 1.6, size=(n, 2))
        inside = shapely_contains(shp, pts)
        mc = inside.mean() * (3.2 * 3.2)
        assert area == pytest.approx(mc, rel=0.02)

    def test_too_short_raises(self):
        with pytest.raises(ValueError):
            polygon_area_2d(np.array([[0, 0], [1, 1]], dtype=float))


def shapely_contains(shp, pts):
    import shapely

    return shapely.contains_xy(shp, pts[:, 0], pts[:, 1])
