import json
import math
import subprocess
import sys

import numpy as np
import pytest

from lmap.cli import main
from lmap.mesh import load_mesh, save_mesh

from conftest import TETRA_OBJ, make_bump, make_grid, make_torus


@pytest.fixture
def tetra_path(tmp_path):
    p = tmp_path / "tetra.obj"
    p.write_text(TETRA_OBJ)
    return str(p)


@pytest.fixture
def bump_path(tmp_path):
    p = tmp_path / "bump.obj"
    save_mesh(make_bump(), str(p), format="obj")
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAnalyze:
    def test_tetrahedron(self, capsys, tetra_path):
        code, out, _ = run_cli(capsys, "analyze", tetra_path)
        assert code == 0
        data = json.loads(out)
        assert data["schema"] == "lmap/1"
        assert (data["v"], data["e"], data["f"]) == (4, 6, 4)
        assert data["chi"] == 2
        assert data["curvature_sum"] == pytest.approx(4 * math.pi, abs=1e-9)
        assert abs(data["gb_residual"]) < 1e-9

    def test_torus(self, capsys, tmp_path):
        p = tmp_path / "torus.off"
        save_mesh(make_torus(), str(p), format="off")
        code, out, _ = run_cli(capsys, "analyze", str(p))
        data = json.loads(out)
        assert code == 0
        assert data["chi"] == 0
        assert data["curvature_sum"] == pytest.approx(0.0, abs=1e-9)
        assert data["boundary_loops"] == 0

    def test_disk(self, capsys, tmp_path):
        p = tmp_path / "disk.obj"
        save_mesh(make_grid(4, 4), str(p))
        code, out, _ = run_cli(capsys, "analyze", str(p))
        data = json.loads(out)
        assert data["chi"] == 1
        assert data["boundary_loops"] == 1
        assert abs(data["gb_residual"]) < 1e-9

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "analyze", str(tmp_path / "nope.obj"))
        assert code == 2
        assert "error" in err

    def test_quad_face(self, capsys, tmp_path):
        p = tmp_path / "quad.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        code, _, err = run_cli(capsys, "analyze", str(p))
        assert code == 2

    def test_nonmanifold(self, capsys, tmp_path):
        p = tmp_path / "bad.obj"
        p.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 0 -1 0\n"
            "f 1 2 3\nf 2 1 4\nf 2 1 5\n"
        )
        code, _, err = run_cli(capsys, "analyze", str(p))
        assert code == 3


class TestSelect:
    def test_radius_zero(self, capsys, bump_path, tmp_path):
        out_file = tmp_path / "roi.txt"
        code, out, _ = run_cli(
            capsys, "select", bump_path, "--seed", "220", "--radius", "0", "-o", str(out_file)
        )
        assert code == 0
        assert out_file.read_text() == "220\n"

    def test_radius_covers_all(self, capsys, bump_path, tmp_path):
        out_file = tmp_path / "roi.txt"
        code, out, _ = run_cli(
            capsys, "select", bump_path, "--seed", "0", "--radius", "1e9", "-o", str(out_file)
        )
        assert json.loads(out)["selected"] == 441
        assert len(out_file.read_text().splitlines()) == 441

    def test_byte_stable(self, capsys, bump_path, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        run_cli(capsys, "select", bump_path, "--seed", "220", "--radius", "3", "-o", str(a))
        run_cli(capsys, "select", bump_path, "--seed", "220", "--radius", "3", "-o", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) > 10

    def test_bad_seed(self, capsys, bump_path, tmp_path):
        code, _, _ = run_cli(
            capsys, "select", bump_path, "--seed", "100000", "--radius", "1",
            "-o", str(tmp_path / "r.txt"),
        )
        assert code == 2


class TestFlatten:
    def flatten_args(self, bump_path, tmp_path, *extra):
        roi = tmp_path / "roi.txt"
        return [
            "flatten", bump_path,
            "--seed", "220", "--radius", "3",
            "-o", str(tmp_path / "out.obj"),
            "--report", str(tmp_path / "report.json"),
            "--distortion", str(tmp_path / "dist.json"),
            "--no-timing",
            *extra,
        ]

    def test_full_pipeline(self, capsys, bump_path, tmp_path):
        code, out, err = run_cli(capsys, *self.flatten_args(bump_path, tmp_path))
        assert code == 0, err
        summary = json.loads(out)
        assert summary["converged"] is True

        report = json.loads((tmp_path / "report.json").read_text())
        assert report["schema"] == "lmap/1"
        assert len(report["steps"]) == 5
        assert all(s["converged"] for s in report["steps"])
        assert report["final_curvature"]["interior_max_abs"] < 0.02
        assert "timing" not in report

        dist = json.loads((tmp_path / "dist.json").read_text())
        assert len(dist["angle_eta"]["counts"]) == 64
        assert len(dist["angle_eta"]["edges"]) == 65

        original = make_bump()
        deformed = load_mesh(str(tmp_path / "out.obj"))
        # non-ROI positions byte-identical through the 9-digit round trip
        from lmap.mesh import geodesic_ball
        ball = geodesic_ball(original, 220, 3.0)
        outside = np.setdiff1d(np.arange(441), ball)
        reloaded_original = load_mesh(bump_path)
        assert np.array_equal(
            deformed.positions[outside], reloaded_original.positions[outside]
        )

    def test_deterministic_outputs(self, capsys, bump_path, tmp_path):
        d1 = tmp_path / "run1"
        d2 = tmp_path / "run2"
        d1.mkdir()
        d2.mkdir()
        for d in (d1, d2):
            code = main([
                "flatten", bump_path, "--seed", "220", "--radius", "3",
                "-o", str(d / "out.obj"), "--report", str(d / "report.json"),
                "--distortion", str(d / "dist.json"), "--no-timing",
            ])
            capsys.readouterr()
            assert code == 0
        assert (d1 / "out.obj").read_bytes() == (d2 / "out.obj").read_bytes()
        assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()
        assert (d1 / "dist.json").read_bytes() == (d2 / "dist.json").read_bytes()

    def test_csv_distortion(self, capsys, bump_path, tmp_path):
        code, _, _ = run_cli(
            capsys, "flatten", bump_path, "--seed", "220", "--radius", "3",
            "-o", str(tmp_path / "out.obj"),
            "--distortion", str(tmp_path / "dist.csv"), "--no-timing",
        )
        assert code == 0
        lines = (tmp_path / "dist.csv").read_text().strip().splitlines()
        assert lines[0] == "metric,edge_lo,edge_hi,count"
        assert any(l.startswith("area_eps,") for l in lines[1:])
        assert any(l.startswith("angle_eta,") for l in lines[1:])

    def test_empty_roi_usage_error(self, capsys, bump_path, tmp_path):
        roi = tmp_path / "empty.txt"
        roi.write_text("")
        code, _, err = run_cli(
            capsys, "flatten", bump_path, "--roi", str(roi),
            "-o", str(tmp_path / "out.obj"),
        )
        assert code == 1

    def test_zero_steps_usage_error(self, capsys, bump_path, tmp_path):
        code, _, _ = run_cli(
            capsys, "flatten", bump_path, "--seed", "220", "--radius", "3",
            "--steps", "0", "-o", str(tmp_path / "out.obj"),
        )
        assert code == 1

    def test_roi_and_seed_conflict(self, capsys, bump_path, tmp_path):
        roi = tmp_path / "roi.txt"
        roi.write_text("220\n")
        code, _, _ = run_cli(
            capsys, "flatten", bump_path, "--roi", str(roi), "--seed", "220",
            "--radius", "3", "-o", str(tmp_path / "out.obj"),
        )
        assert code == 1

    def test_numerical_failure_exit_code(self, capsys, bump_path, tmp_path):
        code, _, err = run_cli(
            capsys, "flatten", bump_path, "--seed", "220", "--radius", "3",
            "--epsilon", "1e-15", "--max-newton", "1",
            "-o", str(tmp_path / "out.obj"),
        )
        assert code == 4
        assert "error" in err


class TestParsing:
    def test_unknown_command(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 1

    def test_missing_required(self, capsys, tetra_path):
        code, _, _ = run_cli(capsys, "select", tetra_path, "--seed", "0")
        assert code == 1

    def test_console_script(self, tetra_path):
        proc = subprocess.run(
            [sys.executable, "-m", "lmap.cli", "analyze", tetra_path],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["chi"] == 2


class TestThreadCap:
    def test_default(self, monkeypatch):
        from lmap.cli import thread_cap
        monkeypatch.delenv("LMAP_THREADS", raising=False)
        assert 1 <= thread_cap() <= 4

    def test_env_override(self, monkeypatch):
        from lmap.cli import thread_cap
        monkeypatch.setenv("LMAP_THREADS", "2")
        assert thread_cap() == 2

    def test_bad_value(self, monkeypatch):
        from lmap.cli import thread_cap
        from lmap.errors import UsageError
        monkeypatch.setenv("LMAP_THREADS", "zero")
        with pytest.raises(UsageError):
            thread_cap()
