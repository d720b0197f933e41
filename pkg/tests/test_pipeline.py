import numpy as np
import pytest

from flatpoly.config import NormalEstimationParams, PipelineConfig
from flatpoly.geometry import ring_area
from flatpoly.mesh import mesh_from_user
from flatpoly.pipeline import StageError, bench, run_scene
from flatpoly.postprocess import PostprocessParams
from flatpoly.segmentation import SegmentationParams
from flatpoly.smoothing import BilateralParams, LaplacianParams
from flatpoly.synthetic import flat_plane_opc, room_scene, step_scene


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


def polygon_signature(result):
    sig = []
    for p in result.polygons:
        sig.append((tuple(map(tuple, p.shell)),
                    tuple(tuple(map(tuple, h)) for h in p.holes)))
    return tuple(sorted(sig))


class TestRunScene:
    def test_flat_plane_single_rectangle(self):
        opc = flat_plane_opc(20, 20, spacing=0.05)
        cfg = PipelineConfig(
            kind="organized",
            fixed_normals=np.array([[0.0, 0.0, 1.0]]),
            segmentation=SegmentationParams(l_max=0.2, ang_min=0.9, tri_min=10,
                                            vertices_hole_min=3),
        )
        res = run_scene(cfg, opc)
        assert len(res.segments) == 1
        assert len(res.polygons) == 1
        poly = res.polygons[0]
        assert poly.holes == []
        area = ring_area(poly.shell)
        assert area == pytest.approx((19 * 0.05) ** 2, rel=1e-6)
        for stage in ("front_end", "normal_estimation", "extraction",
                      "postprocess", "total"):
            assert res.timings[stage] >= 0.0
        assert res.timings["total"] >= max(
            v for k, v in res.timings.items() if k != "total") - 1e-6

    def test_empty_cloud(self):
        cfg = PipelineConfig(kind="organized")
        res = run_scene(cfg, np.empty((0, 0, 3)))
        assert res.polygons == [] and res.segments == []
        assert "total" in res.timings

    def test_mesh_input(self):
        points, triangles, expected = step_scene()
        mesh = mesh_from_user(points, triangles)
        cfg = PipelineConfig(
            kind="mesh",
            fixed_normals=np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
            segmentation=SegmentationParams(l_max=2.0, ang_min=0.95, ptp_max=0.2,
                                            tri_min=5, vertices_hole_min=6),
        )
        res = run_scene(cfg, mesh)
        assert len(res.segments) == 3

    def test_room_scene_recovers_planes(self):
        scene = room_scene(n=120, noise=0.002, seed=4)
        res = run_scene(room_config(), scene.opc)
        kinds = {tuple(np.round(n).astype(int)) for n in res.dominant_normals}
        assert (0, 0, 1) in kinds
        assert len(res.dominant_normals) == 5

    def test_unorganized_kind(self, rng):
        pts = rng.uniform(-1, 1, size=(300, 2))
        cloud = np.column_stack([pts, rng.normal(0, 0.002, 300)])
        cfg = PipelineConfig(
            kind="unorganized",
            fixed_normals=np.array([[0.0, 0.0, 1.0]]),
            segmentation=SegmentationParams(l_max=0.8, ang_min=0.9, tri_min=20,
                                            vertices_hole_min=3),
        )
        res = run_scene(cfg, cloud)
        assert len(res.segments) == 1
        assert res.polygons

    def test_stage_error_attribution(self):
        cfg = PipelineConfig(kind="unorganized",
                             fixed_normals=np.array([[0.0, 0.0, 1.0]]))
        collinear = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
        with pytest.raises(StageError, match="front_end"):
            run_scene(cfg, collinear)

    def test_mesh_kind_rejects_array(self):
        cfg = PipelineConfig(kind="mesh")
        with pytest.raises(StageError, match="front_end"):
            run_scene(cfg, np.zeros((4, 3)))


class TestDeterminism:
    def test_thread_counts_identical_polygons(self):
        scene = room_scene(n=100, noise=0.002, seed=9)
        signatures = []
        for threads in (1, 2, 4):
            res = run_scene(room_config(threads), scene.opc)
            signatures.append(polygon_signature(res))
        assert signatures[0] == signatures[1] == signatures[2]
        assert len(signatures[0]) > 0


class TestBench:
    def test_single_repetition_zero_std(self):
        opc = flat_plane_opc(12, 12, spacing=0.05)
        cfg = PipelineConfig(kind="organized",
                             fixed_normals=np.array([[0.0, 0.0, 1.0]]),
                             segmentation=SegmentationParams(l_max=0.2, ang_min=0.9,
                                                             tri_min=5))
        report = bench(cfg, opc, repetitions=1)
        for mean, std in report.stage_ms.values():
            assert std == 0.0 and mean >= 0.0
        assert "total" in report.stage_ms

    def test_repeated_runs_identical_results(self):
        opc = flat_plane_opc(12, 12, spacing=0.05, noise=0.002, seed=3)
        cfg = PipelineConfig(kind="organized",
                             fixed_normals=np.array([[0.0, 0.0, 1.0]]),
                             segmentation=SegmentationParams(l_max=0.2, ang_min=0.9,
                                                             tri_min=5))
        a = run_scene(cfg, opc)
        b = run_scene(cfg, opc)
        assert polygon_signature(a) == polygon_signature(b)

    def test_thread_sweep_table(self):
        opc = flat_plane_opc(25, 25, spacing=0.05, noise=0.001, seed=1)
        cfg = PipelineConfig(kind="organized",
                             fixed_normals=np.array([[0.0, 0.0, 1.0]]),
                             segmentation=SegmentationParams(l_max=0.2, ang_min=0.9,
                                                             tri_min=5))
        report = bench(cfg, opc, repetitions=1, thread_sweep=[1, 2])
        assert 1 in report.sweep
        assert set(report.sweep[1]) == {1, 2}
        text = report.format()
        assert "speedup" in text


class TestWriteResults:
    def test_round_trip_scene_polygons(self, tmp_path):
        from flatpoly import io

        opc = flat_plane_opc(15, 15, spacing=0.05)
        opc[7, 7] = np.nan
        cfg = PipelineConfig(
            kind="organized",
            fixed_normals=np.array([[0.0, 0.0, 1.0]]),
            segmentation=SegmentationParams(l_max=0.2, ang_min=0.9, tri_min=10,
                                            vertices_hole_min=3),
        )
        res = run_scene(cfg, opc)
        assert len(res.polygons) == 1 and len(res.polygons[0].holes) == 1
        path = tmp_path / "scene.polygons"
        io.write_polygons(res.polygons, path, stage_timings=res.timings)
        back = io.read_polygons(path)
        np.testing.assert_array_equal(back[0].shell, res.polygons[0].shell)
        np.testing.assert_array_equal(back[0].holes[0], res.polygons[0].holes[0])
