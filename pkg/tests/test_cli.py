import numpy as np

from flatpoly import io
from flatpoly.cli import main
from flatpoly.synthetic import flat_plane_opc, step_scene


def write_grid(path, opc):
    M, N = opc.shape[:2]
    rows = [f"{M} {N}"]
    for p in opc.reshape(-1, 3):
        rows.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    path.write_text("\n".join(rows) + "\n")


CONFIG = """
[input]
kind = organized

[normals]
fixed = 0 0 1

[segmentation]
l_max = 0.2
ang_min = 0.9
tri_min = 10
vertices_hole_min = 3
"""


class TestExtract:
    def test_organized_grid_end_to_end(self, tmp_path, capsys):
        opc = flat_plane_opc(15, 15, spacing=0.05)
        opc[7, 7] = np.nan
        grid = tmp_path / "scene.grid"
        write_grid(grid, opc)
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(CONFIG)
        out = tmp_path / "result.polygons"
        rc = main(["extract-organized", str(grid), "--config", str(cfg),
                   "--output", str(out)])
        assert rc == 0
        assert "1 segment(s), 1 polygon(s)" in capsys.readouterr().out
        polys = io.read_polygons(out)
        assert len(polys) == 1 and len(polys[0].holes) == 1

    def test_mesh_extract(self, tmp_path, capsys):
        points, triangles, _ = step_scene()
        obj = tmp_path / "scene.obj"
        lines = [f"v {p[0]} {p[1]} {p[2]}" for p in points]
        lines += [f"f {t[0]+1} {t[1]+1} {t[2]+1}" for t in triangles]
        obj.write_text("\n".join(lines) + "\n")
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("""
[input]
kind = mesh

[normals]
fixed = 0 0 1; 1 0 0

[segmentation]
l_max = 2.0
ang_min = 0.95
ptp_max = 0.2
tri_min = 5
vertices_hole_min = 6
""")
        rc = main(["extract-mesh", str(obj), "--config", str(cfg)])
        assert rc == 0
        assert "3 segment(s)" in capsys.readouterr().out

    def test_unorganized_xyz(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        pts = np.column_stack([rng.uniform(0, 1, (200, 2)), rng.normal(0, 0.001, 200)])
        xyz = tmp_path / "cloud.xyz"
        xyz.write_text("\n".join(f"{p[0]} {p[1]} {p[2]}" for p in pts))
        rc = main(["extract-unorganized", str(xyz)])
        assert rc == 0

    def test_missing_file_fails_cleanly(self, tmp_path, capsys):
        rc = main(["extract-organized", str(tmp_path / "nope.grid")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_stage_error_reported(self, tmp_path, capsys):
        xyz = tmp_path / "line.xyz"
        xyz.write_text("0 0 0\n1 0 0\n2 0 0\n")
        rc = main(["extract-unorganized", str(xyz)])
        assert rc == 1
        assert "front_end" in capsys.readouterr().err


class TestPeaks:
    def test_peaks_table_and_image(self, tmp_path, capsys):
        opc = flat_plane_opc(30, 30, spacing=0.05, noise=0.001, seed=2)
        grid = tmp_path / "p.grid"
        write_grid(grid, opc)
        img = tmp_path / "ga.pgm"
        rc = main(["peaks", str(grid), "--kind", "organized", "--emit-image", str(img)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "dominant plane normal(s)" in out
        assert "1.000000" in out  # the +z peak
        assert img.read_text().startswith("P2")


class TestBench:
    def test_bench_runs(self, tmp_path, capsys):
        opc = flat_plane_opc(15, 15, spacing=0.05)
        grid = tmp_path / "b.grid"
        write_grid(grid, opc)
        cfg = tmp_path / "cfg.ini"
        cfg.write_text(CONFIG)
        rc = main(["bench", str(grid), "--kind", "organized", "--config", str(cfg),
                   "--repetitions", "2", "--threads-sweep", "1,2"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "stage timings" in out
        assert "speedup" in out
