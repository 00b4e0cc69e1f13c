import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.distance import cdist

from constwidth.dual import (
    CoarseGridWarning, GridDomain, antipodal_relation, box_nodes, check_antipodal_condition,
    complete_to_maximal, completion_gap, is_constant_diameter, is_r_maximal, linf_box_completion,
    omega_diameter, r_dual,
)
from constwidth.errors import DomainError, PreconditionError, ResourceError
from constwidth.geometry import Norm, PointCloud, diameter, hausdorff_distance, sample_sphere
from constwidth.planar import curve_from_beta, curve_vertices, reuleaux_beta

from conftest import circle_points

TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])


def fixed_grid(lo=-2.0, hi=2.0, h=0.05, dim=2):
    return GridDomain((math.floor(lo / h),) * dim, (math.ceil(hi / h),) * dim, h)


class TestGridDomain:
    def test_contains_inflated_cloud(self):
        c = PointCloud(TRI)
        g = GridDomain.around(c, 1.0)
        lo = np.array(g.lo) * g.h
        hi = np.array(g.hi) * g.h
        assert np.all(lo < TRI.min(axis=0) - 1.0) and np.all(hi > TRI.max(axis=0) + 1.0)
        assert max(g.shape) <= 402

    def test_budget(self):
        with pytest.raises(ResourceError):
            GridDomain.around(PointCloud(TRI), 1.0, h=1e-3, budget=10**6)

    def test_bad_step(self):
        with pytest.raises(DomainError):
            GridDomain((0, 0), (1, 1), 0.0)

    def test_quantization(self):
        g = fixed_grid(h=0.1)
        assert g.quantization(Norm.EUCLIDEAN) == pytest.approx(0.1 * math.sqrt(2))
        assert g.quantization(Norm.LINF) == pytest.approx(0.1)


class TestRDual:
    def test_single_point_gives_unit_ball(self):
        g = fixed_grid(h=0.05)
        d = r_dual(PointCloud(np.zeros((1, 2))), 1.0, g)
        axis = np.arange(g.lo[0], g.hi[0] + 1) * g.h
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        expect = np.hypot(xx, yy) <= 1.0 + 1e-9
        assert len(d) == int(expect.sum())
        assert np.all(np.linalg.norm(d.points, axis=1) <= 1.0 + 1e-9)

    def test_linf_two_points_give_square(self):
        c = PointCloud(np.array([[0.0, 0.0], [2.0, 2.0]]), Norm.LINF)
        g = GridDomain.around(c, 2.0, h=0.1)
        d = r_dual(c, 2.0, g)
        assert d.points.min(axis=0) == pytest.approx([0.0, 0.0], abs=1e-12)
        assert d.points.max(axis=0) == pytest.approx([2.0, 2.0], abs=1e-12)
        assert len(d) == 21 * 21

    def test_triangle_gives_three_ball_intersection(self):
        c = PointCloud(TRI)
        g = GridDomain.around(c, 1.0, h=0.02)
        d = r_dual(c, 1.0, g)
        assert np.all(cdist(d.points, TRI).max(axis=1) <= 1.0 + 1e-9)
        nodes = np.stack(np.meshgrid(*(g.axis(k) for k in range(2)), indexing="ij"), -1).reshape(-1, 2)
        member = cdist(nodes, TRI).max(axis=1) <= 1.0 + 1e-9
        assert len(d) == int(member.sum())

    def test_precondition(self):
        c = PointCloud(np.array([[0.0, 0.0], [3.0, 0.0]]))
        with pytest.raises(PreconditionError):
            r_dual(c, 1.0, GridDomain.around(c, 1.0))

    def test_coarse_grid_flagged(self):
        c = PointCloud(np.array([[0.9, 0.9], [1.9, 0.9]]))
        g = GridDomain((-5, -5), (5, 5), 2.0)
        with pytest.warns(CoarseGridWarning):
            assert len(r_dual(c, 1.0, g)) == 0

    @given(st.integers(0, 10_000))
    def test_antitone(self, seed):
        rng = np.random.default_rng(seed)
        big = rng.uniform(-0.3, 0.3, (8, 2))
        small = big[:4]
        g = fixed_grid(h=0.05)
        d_small = {tuple(np.round(p / g.h).astype(int)) for p in r_dual(PointCloud(small), 1.0, g).points}
        d_big = {tuple(np.round(p / g.h).astype(int)) for p in r_dual(PointCloud(big), 1.0, g).points}
        assert d_big <= d_small

    @given(st.integers(0, 10_000))
    def test_hull_invariance(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-0.3, 0.3, (6, 2))
        mids = 0.5 * (pts[:, None] + pts[None, :]).reshape(-1, 2)
        g = fixed_grid(h=0.05)
        a = r_dual(PointCloud(pts), 1.0, g).points
        b = r_dual(PointCloud(np.vstack([pts, mids])), 1.0, g).points
        assert np.array_equal(a, b)

    @given(st.integers(0, 10_000), st.floats(0.2, 1.5))
    def test_contains_cloud_iff_bounded(self, seed, spread):
        rng = np.random.default_rng(seed)
        h = 0.05
        pts = np.round(rng.uniform(-spread, spread, (5, 2)) / h) * h  # nodes of the grid
        c = PointCloud(pts)
        if diameter(c) > 1.0 + h:
            return
        d = r_dual(c, 1.0, fixed_grid(h=h))
        keys = {tuple(np.round(p / h).astype(int)) for p in d.points}
        inside = all(tuple(np.round(p / h).astype(int)) in keys for p in pts)
        assert inside == (diameter(c) <= 1.0 + 1e-9)


class TestMaximality:
    def test_disc_is_maximal(self):
        h = 0.02
        c = PointCloud(circle_points(2000))
        g = GridDomain.around(c, 1.0, h=h)
        res = is_r_maximal(c.union(r_dual(c, 1.0, g)), 1.0, g, tol=2 * h)
        assert res.maximal

    def test_segment_is_not_maximal(self):
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        g = GridDomain.around(c, 1.0, h=0.02)
        res = is_r_maximal(c, 1.0, g, tol=0.0)
        assert not res.maximal
        assert np.all(cdist(res.witness[None], c.points) <= 1.0 + 1e-9)

    def test_reuleaux_triangle_is_maximal(self):
        h = 0.01
        body = curve_from_beta(reuleaux_beta(1), 1.0, 2048).as_body()
        solid = body.filled(24)
        g = GridDomain.around(solid, 1.0, h=h)
        assert is_r_maximal(solid, 1.0, g, tol=2 * h).maximal


class TestCompletion:
    def test_triangle_completion_is_reuleaux(self):
        h = 1 / 100
        beta = reuleaux_beta(1)
        verts = curve_vertices(beta, 1.0)
        assert cdist(verts, verts)[np.triu_indices(3, 1)] == pytest.approx([1.0] * 3)
        c = PointCloud(verts)
        g = GridDomain.around(c, 1.0, h=h)
        d = complete_to_maximal(c, 1.0, g)
        assert np.array_equal(d.points[:3], verts)
        assert diameter(d) <= 1.0 + h * math.sqrt(2)
        assert completion_gap(d, 1.0, g) <= h * math.sqrt(2)
        ref = curve_from_beta(beta, 1.0, 2048).as_body().filled(40)
        assert hausdorff_distance(d, ref) <= 3 * h

    def test_idempotent(self):
        h = 1 / 50
        c = PointCloud(TRI)
        g = GridDomain.around(c, 1.0, h=h)
        d = complete_to_maximal(c, 1.0, g)
        again = complete_to_maximal(d, 1.0, g)
        extra = again.points[len(d):]
        if len(extra):
            assert cdist(extra, d.points).min(axis=1).max() <= h * math.sqrt(2)

    def test_disc_fixed_point(self):
        h = 1 / 50
        c = PointCloud(circle_points(512))
        g = GridDomain.around(c, 1.0, h=h)
        dual = r_dual(c, 1.0, g)
        full = c.union(dual)
        d = complete_to_maximal(full, 1.0, g)
        assert len(d) == len(full)

    def test_linf_box(self):
        c = PointCloud(np.array([[0.0, 0.0], [2.0, 2.0]]), Norm.LINF)
        low, high = linf_box_completion(c, 2.0)
        assert np.allclose(low, [0, 0]) and np.allclose(high, [2, 2])
        g = GridDomain.around(c, 2.0, h=0.05)
        d = complete_to_maximal(c, 2.0, g)
        box = PointCloud(box_nodes(low, high, g), Norm.LINF)
        assert hausdorff_distance(d, box) <= g.h + 1e-12

    def test_precondition(self):
        c = PointCloud(np.array([[0.0, 0.0], [2.0, 0.0]]))
        with pytest.raises(PreconditionError):
            complete_to_maximal(c, 1.0, GridDomain.around(c, 1.0, h=0.1))


class TestAntipodes:
    def test_segment(self):
        rel = antipodal_relation(PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]])), 1.0, 1e-9)
        assert sorted(map(tuple, rel.pairs.tolist())) == [(0, 1), (1, 0)]

    def test_disc_pairs_only_antipode(self):
        pts = circle_points(64)
        rel = antipodal_relation(PointCloud(pts), 1.0, 1e-9)
        for i in range(64):
            assert rel.partners(i).tolist() == [(i + 32) % 64]

    def test_symmetric_and_within_tolerance(self):
        pts = curve_from_beta(reuleaux_beta(1), 1.0, 600).cloud.points
        rel = antipodal_relation(PointCloud(pts), 1.0, 1e-9)
        s = {tuple(p) for p in rel.pairs.tolist()}
        assert all((j, i) in s for i, j in s)
        d = np.linalg.norm(pts[rel.pairs[:, 0]] - pts[rel.pairs[:, 1]], axis=1)
        assert np.all(np.abs(d - 1.0) <= 1e-9)

    def test_reuleaux_vertex_sees_opposite_arc(self):
        curve = curve_from_beta(reuleaux_beta(1), 1.0, 600)
        pts = curve.cloud.points
        rel = antipodal_relation(PointCloud(pts), 1.0, 1e-9)
        t = curve.t[:-1]
        # the origin is the corner with normals in [5 pi/3, 2 pi]; its opposite arc has normals [2 pi/3, pi]
        partners = set(rel.partners(0).tolist())
        arc = np.flatnonzero((t >= 2 * math.pi / 3) & (t <= math.pi))
        assert len(arc) > 50 and set(arc.tolist()) <= partners
        others = pts[sorted(partners - set(arc.tolist()))]
        verts = curve_vertices(reuleaux_beta(1), 1.0)
        assert cdist(others, verts).min(axis=1).max() < 1e-12

    def test_condition(self):
        ok, bad = check_antipodal_condition(PointCloud(circle_points(100)), 1.0, 1e-9)
        assert ok and len(bad) == 0
        s = np.linspace(0, 1, 11)
        sq = np.vstack([np.column_stack([s, 0 * s]), np.column_stack([1 + 0 * s, s]),
                        np.column_stack([1 - s, 1 + 0 * s]), np.column_stack([0 * s, 1 - s])])
        ok, bad = check_antipodal_condition(PointCloud(sq), math.sqrt(2), 1e-9)
        assert not ok
        assert any(np.allclose(sq[b], [0.5, 0.0]) for b in bad)
        pent = curve_from_beta(reuleaux_beta(2), 1.0, 2000).cloud
        assert check_antipodal_condition(pent, 1.0, 1e-9)[0]


class TestWidths:
    def test_examples(self):
        assert omega_diameter(PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]])), [0.0, 1.0]) == 0.0
        sq = PointCloud(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
        assert omega_diameter(sq, [math.sqrt(0.5), math.sqrt(0.5)]) == pytest.approx(math.sqrt(2))
        disc = PointCloud(circle_points(4096))
        assert omega_diameter(disc, [0.6, 0.8]) == pytest.approx(1.0, abs=1e-6)

    def test_constant_diameter(self):
        dirs = sample_sphere(2, 512, "uniform")
        assert is_constant_diameter(PointCloud(circle_points(4096)), 1.0, dirs, 1e-6)
        sq = PointCloud(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
        res = is_constant_diameter(sq, math.sqrt(2), dirs, 1e-6)
        assert not res and abs(res.worst_direction @ [1.0, 0.0]) in (0.0, 1.0)
        body = curve_from_beta(reuleaux_beta(1), 1.0, 4096).as_body()
        tol = 1e-6 + body.sampling_bound(dirs)
        assert is_constant_diameter(body.cloud, 1.0, dirs, tol)

    def test_linf_rejected(self):
        with pytest.raises(DomainError):
            omega_diameter(PointCloud(np.zeros((1, 2)), Norm.LINF), [1.0, 0.0])


class TestEquivalence:
    @pytest.mark.parametrize("name,solid,expect", [
        ("disc", lambda: PointCloud(circle_points(1500)), True),
        ("reuleaux", lambda: curve_from_beta(reuleaux_beta(1), 1.0, 1500).as_body().cloud, True),
        ("square", lambda: PointCloud(np.array([[0, 0], [0.7, 0], [0.7, 0.7], [0, 0.7]])), False),
        ("segment", lambda: PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]])), False),
    ])
    def test_maximal_iff_constant_diameter(self, name, solid, expect):
        h = 0.02
        boundary = solid()
        dirs = sample_sphere(2, 512, "uniform")
        width = is_constant_diameter(boundary, 1.0, dirs, 1e-3)
        g = GridDomain.around(boundary, 1.0, h=h)
        dual = r_dual(boundary, 1.0, g)
        inside = dual.points[cdist(dual.points, boundary.points).min(axis=1) > 0]
        filled = boundary if not expect else boundary.union(inside) if len(inside) else boundary
        if expect:
            filled = boundary.union(r_dual(boundary, 1.0, g))
        maximal = is_r_maximal(filled, 1.0, g, tol=2 * h)
        assert bool(width) == bool(maximal) == expect
