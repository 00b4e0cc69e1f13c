import json
import math

import numpy as np
import pytest

from constwidth.dual import GridDomain, is_r_maximal
from constwidth.geometry import PointCloud, sample_sphere
from constwidth.median import build_body, builtin_seed, family
from constwidth.planar import TrigBeta, curve_from_beta, reuleaux_beta, smooth_beta_sequence
from constwidth.verification import (
    VerificationReport, cloud_sampling_bound, verify_body, verify_cloud, verify_constant_width,
    verify_convexity, verify_family_continuity, verify_r_convexity,
)

PI = math.pi
CIRCLE = sample_sphere(2, 2048, "uniform")


def disc(m=2048, radius=0.5):
    t = np.linspace(0, 2 * PI, m, endpoint=False)
    return PointCloud(radius * np.column_stack([np.cos(t), np.sin(t)]))


def lens(arc_radius, half_chord=0.3, m=400):
    """Boundary of the intersection of two discs of radius arc_radius, corners at (0, +-half_chord)."""
    off = math.sqrt(arc_radius**2 - half_chord**2)
    a = math.asin(half_chord / arc_radius)
    s = np.linspace(-a, a, m)
    right = np.column_stack([-off + arc_radius * np.cos(s), arc_radius * np.sin(s)])
    return PointCloud(np.vstack([right, -right[1:-1]]))


def square(m=200):
    s = np.linspace(-0.5, 0.5, m, endpoint=False)
    one = np.ones_like(s) * 0.5
    return PointCloud(np.vstack([np.column_stack([s, -one]), np.column_stack([one, s]),
                                 np.column_stack([-s, one]), np.column_stack([-one, -s])]))


class TestConstantWidth:
    def test_disc(self):
        c = disc()
        res = verify_constant_width(c, 1.0, CIRCLE, 1e-6 + cloud_sampling_bound(c, 1.0))
        assert res.passed

    def test_square_fails_with_axis_witness(self):
        res = verify_constant_width(square(), math.sqrt(2), CIRCLE, 1e-6)
        assert not res.passed
        w = np.abs(res.witness["worst_direction"])
        assert np.allclose(np.sort(w), [0.0, 1.0], atol=1e-12)
        assert res.witness["worst_width"] == pytest.approx(1.0)

    def test_constructed_body(self):
        b = build_body(builtin_seed("cos3theta", 1 / 16), 1.1, CIRCLE)
        rep = verify_body(b)
        assert rep.passed, rep.summary()

    def test_mollified_stages(self):
        for n in range(3, 8):
            c = curve_from_beta(smooth_beta_sequence(reuleaux_beta(1), n), 1.0)
            assert verify_body(c.as_body()).passed
        assert verify_body(curve_from_beta(reuleaux_beta(1), 1.0).as_body()).passed


class TestConvexity:
    def test_circle(self):
        assert verify_convexity(disc(), 1e-9).passed

    def test_annulus_sector(self):
        t = np.linspace(0, PI / 2, 100)
        outer = np.column_stack([np.cos(t), np.sin(t)])
        pts = np.vstack([outer, 0.5 * outer[::-1]])
        res = verify_convexity(PointCloud(pts), 1e-9)
        assert not res.passed
        assert np.linalg.norm(res.witness["deepest_point"]) == pytest.approx(0.5)

    def test_override_below_r_star(self):
        b = build_body(builtin_seed("cos3theta", 1 / 16), 0.5, CIRCLE, override=True)
        assert not verify_convexity(b.cloud, 1e-9).passed
        assert not verify_body(b).passed

    def test_degenerate(self):
        res = verify_convexity(PointCloud([[0, 0], [1, 1], [2, 2]]), 1e-9)
        assert not res.passed and res.witness["degenerate"]

    def test_3d(self):
        sph = PointCloud(0.5 * sample_sphere(3, 500, "fibonacci"))
        assert verify_convexity(sph, 1e-9).passed
        dented = sph.points.copy()
        dented[0] *= 0.8
        assert not verify_convexity(PointCloud(dented), 1e-9).passed


class TestRConvexity:
    def test_disc(self):
        assert verify_r_convexity(disc(512), 1.0, pair_budget=5000).passed

    def test_reuleaux(self):
        c = curve_from_beta(reuleaux_beta(1), 1.0, 1024)
        assert verify_r_convexity(c.cloud, 1.0, pair_budget=5000).passed

    def test_lens_of_flatter_arcs_fails(self):
        res = verify_r_convexity(lens(2.0), 1.0, pair_budget=5000)
        assert not res.passed
        assert len(res.witness["pair"]) == 2 and "arc_point" in res.witness

    def test_lens_of_rounder_arcs_passes(self):
        assert verify_r_convexity(lens(0.5), 1.0, pair_budget=5000).passed
        assert not verify_constant_width(lens(0.5), 1.0, CIRCLE, 1e-6).passed

    def test_3d_sphere_coverage(self):
        sph = PointCloud(0.5 * sample_sphere(3, 800, "fibonacci"))
        res = verify_r_convexity(sph, 1.0, pair_budget=2000)
        assert res.passed
        assert 0.0 < res.witness["coverage"] <= 1.0


class TestFamily:
    LAMS = np.linspace(0.0, 1.0, 11)

    def test_zero_seed(self):
        bodies = family(builtin_seed("zero", dim=2), 1.0, self.LAMS, CIRCLE)
        res = verify_family_continuity(bodies, self.LAMS)
        assert res.passed
        assert np.all(np.asarray(res.witness["distances"]) == 0.0)

    def test_cos3_bound(self):
        lams = np.linspace(0.0, 1.0, 21)  # 0.05 steps
        bodies = family(builtin_seed("cos3theta", 1 / 16), 1.0, lams, CIRCLE)
        res = verify_family_continuity(bodies, lams)
        assert res.passed, res.witness
        tenth = [bodies[i] for i in range(0, 21, 2)]
        res10 = verify_family_continuity(tenth, lams[::2])
        hmax = np.max(np.linalg.norm(bodies[-1].median, axis=1))
        assert res10.witness["max_distance"] <= 0.1 * hmax + 1e-9

    def test_triangle_inequality(self):
        from constwidth.geometry import hausdorff_distance
        b = family(builtin_seed("cos3theta", 1 / 16), 1.0, [0.0, 0.5, 1.0], CIRCLE)
        direct = hausdorff_distance(b[0].cloud, b[2].cloud)
        via = hausdorff_distance(b[0].cloud, b[1].cloud) + hausdorff_distance(b[1].cloud, b[2].cloud)
        assert direct <= via + 1e-9


class TestCrossOracle:
    @pytest.mark.parametrize("name", ["disc", "reuleaux", "cos3", "lens"])
    def test_width_and_maximality_agree(self, name):
        if name == "lens":
            c = lens(0.5)
            filled = PointCloud(np.vstack([c.points * s for s in np.linspace(0, 1, 30)]))
            boundary = c
        else:
            if name == "disc":
                curve = curve_from_beta(TrigBeta(), 1.0, 512)
            elif name == "reuleaux":
                curve = curve_from_beta(reuleaux_beta(1), 1.0, 512)
            else:
                curve = curve_from_beta(TrigBeta(cos={3: -1.0}), 1.0, 512)
            body = curve.as_body()
            boundary, filled = body.cloud, body.filled(40)
        grid = GridDomain.around(filled, 1.0, h=0.01)
        cw = verify_constant_width(boundary, 1.0, CIRCLE, 1e-6 + cloud_sampling_bound(boundary, 1.0)).passed
        mx = is_r_maximal(filled, 1.0, grid, 0.02).maximal
        assert cw == mx


class TestReports:
    def test_determinism_and_json(self):
        b = build_body(builtin_seed("cos3theta", 1 / 16), 1.1, CIRCLE)
        a, c = verify_body(b, r_convexity=True), verify_body(b, r_convexity=True)
        assert a.dumps() == c.dumps()
        data = json.loads(a.dumps())
        assert data["schema"] == "constwidth.report/1" and data["passed"]
        for chk in data["checks"]:
            assert {"name", "passed", "residual", "tolerance", "witness"} <= set(chk)
        assert "PASS" in a.summary()

    def test_empty_report_does_not_pass(self):
        assert not VerificationReport().passed

    def test_cloud_verify(self):
        assert verify_cloud(curve_from_beta(reuleaux_beta(1), 1.0).cloud, 1.0).passed
        assert not verify_cloud(square(), math.sqrt(2)).passed
        sparse = verify_cloud(disc(3), 1.0)
        assert sparse.provenance["undersampled"]
