import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmap.distortion import (
    angle_distortion,
    area_distortion,
    build_report,
    histogram,
    histogram_csv,
    histogram_json,
    roi_face_scope,
)
from lmap.errors import UsageError
from lmap.mesh import RoiSelection, TriangleMesh, geodesic_ball
from lmap.metric import DiscreteMetric

from conftest import bump_apex, make_bump, make_grid, make_tetrahedron


def scaled(mesh: TriangleMesh, s: float) -> TriangleMesh:
    return TriangleMesh(mesh.positions * s, mesh.faces)


def rotated(mesh: TriangleMesh, s: float = 1.0) -> TriangleMesh:
    a, b = 0.3, 0.7
    rz = np.array(
        [[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]]
    )
    rx = np.array(
        [[1, 0, 0], [0, math.cos(b), -math.sin(b)], [0, math.sin(b), math.cos(b)]]
    )
    pts = (s * (mesh.positions @ rz.T @ rx.T)) + np.array([1.5, -2.0, 0.25])
    return TriangleMesh(pts, mesh.faces)


class TestIdentities:
    def test_identity_map(self):
        mesh = make_tetrahedron()
        assert np.allclose(area_distortion(mesh, mesh), 0.0, atol=1e-12)
        assert np.allclose(angle_distortion(mesh, mesh), 0.0, atol=1e-12)

    def test_uniform_scale(self):
        mesh = make_tetrahedron()
        eps = area_distortion(mesh, scaled(mesh, 2.0))
        assert np.allclose(eps, math.log(4.0), atol=1e-12)
        eta = angle_distortion(mesh, scaled(mesh, 2.0))
        assert np.allclose(eta, 0.0, atol=1e-12)

    def test_similarity_transform(self):
        mesh = make_grid(4, 4, height=lambda x, y: 0.2 * x * y)
        s = 1.7
        mapped = rotated(mesh, s)
        eta = angle_distortion(mesh, mapped)
        assert np.allclose(eta, 0.0, atol=1e-12)
        eps = area_distortion(mesh, mapped)
        assert np.allclose(eps, 2.0 * math.log(s), atol=1e-12)

    def test_antisymmetry(self):
        mesh = make_bump(9, 0.4, 1.0)
        mapped = TriangleMesh(
            mesh.positions + np.array([0, 0, 0.1]) * np.sin(mesh.positions[:, :1]),
            mesh.faces,
        )
        fwd = area_distortion(mesh, mapped)
        back = area_distortion(mapped, mesh)
        assert np.array_equal(fwd, -back)
        fwd_eta = angle_distortion(mesh, mapped)
        back_eta = angle_distortion(mapped, mesh)
        assert np.array_equal(fwd_eta, -back_eta)

    def test_single_corner_example(self):
        # one right angle mapped to pi/4
        orig = TriangleMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2)])
        mapped = TriangleMesh([(0, 0, 0), (1, 0, 0), (1, 1, 0)], [(0, 1, 2)])
        eta = angle_distortion(orig, mapped)
        assert eta[0, 0] == pytest.approx(math.log(0.5), abs=1e-12)

    def test_mismatched_indexing_rejected(self):
        a = make_grid(3, 3)
        b = make_grid(4, 3)
        with pytest.raises(UsageError):
            area_distortion(a, b)

    def test_scope_restriction(self):
        mesh = make_grid(3, 3)
        eps = area_distortion(mesh, scaled(mesh, 2.0), scope=[4])
        assert np.isnan(eps[0])
        assert eps[4] == pytest.approx(math.log(4.0))


class TestHistogram:
    def test_all_zeros(self):
        h = histogram(np.zeros(10), bin_count=4, lo=-1.0, hi=1.0)
        assert h.counts.tolist() == [0, 0, 10, 0]

    def test_empty(self):
        h = histogram([], bin_count=4, lo=-1.0, hi=1.0)
        assert h.counts.tolist() == [0, 0, 0, 0]

    def test_clamping(self):
        h = histogram([-2.0, 2.0], bin_count=4, lo=-1.0, hi=1.0)
        assert h.counts.tolist() == [1, 0, 0, 1]

    def test_json_and_csv(self):
        h = histogram([0.0, 0.5], bin_count=2, lo=0.0, hi=1.0)
        as_json = histogram_json(h)
        assert as_json == {"edges": [0.0, 0.5, 1.0], "counts": [1, 1]}
        csv = histogram_csv(h)
        lines = csv.strip().splitlines()
        assert lines[0] == "edge_lo,edge_hi,count"
        assert lines[1] == "0,0.5,1"

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.floats(allow_nan=True, allow_infinity=True, width=32), max_size=200
        )
    )
    def test_counts_sum_to_finite_samples(self, samples):
        h = histogram(samples, bin_count=8, lo=-3.0, hi=3.0)
        finite = sum(1 for s in samples if math.isfinite(s))
        assert int(h.counts.sum()) == finite


class TestConformalityGate:
    def test_flow_beats_vertical_projection(self):
        # steeper bump so the projection baseline shows real angle error
        from lmap.extrinsic import run_extrinsic_flow

        mesh = make_bump(21, 1.2, 0.8)
        roi = RoiSelection.from_vertices(
            mesh, geodesic_ball(mesh, bump_apex(), 3.0)
        )
        deformed, _ = run_extrinsic_flow(mesh, roi, steps=5)

        # replay final connectivity onto original positions
        original_replayed = TriangleMesh(
            mesh.positions, deformed.faces, check_areas=False
        )
        fscope = roi_face_scope(original_replayed, roi)
        eta_flow = angle_distortion(original_replayed, deformed, fscope)
        eta_flow = eta_flow[np.isfinite(eta_flow)]

        projected = mesh.positions.copy()
        ids = sorted(roi.vertices)
        projected[ids, 2] = 0.0
        flat = TriangleMesh(projected, mesh.faces, check_areas=False)
        fscope0 = roi_face_scope(mesh, roi)
        eta_proj = angle_distortion(mesh, flat, fscope0)
        eta_proj = eta_proj[np.isfinite(eta_proj)]

        frac_flow = float(np.mean(np.abs(eta_flow) < 0.1))
        frac_proj = float(np.mean(np.abs(eta_proj) < 0.1))
        assert frac_flow > frac_proj
        assert np.median(np.abs(eta_flow)) < np.median(np.abs(eta_proj))


class TestReport:
    def test_build_report_scoped(self):
        mesh = make_bump()
        roi = RoiSelection.from_vertices(mesh, geodesic_ball(mesh, bump_apex(), 3.0))
        report = build_report(mesh, scaled(mesh, 2.0), roi)
        ids = sorted(roi.vertices)
        assert np.allclose(report.area_eps[ids], math.log(4.0), atol=1e-12)
        outside = np.setdiff1d(np.arange(mesh.vertex_count), ids)
        assert np.all(np.isnan(report.area_eps[outside]))
        assert int(report.area_hist.counts.sum()) == len(ids)
        nfaces = len(roi_face_scope(mesh, roi))
        assert int(report.angle_hist.counts.sum()) == 3 * nfaces
