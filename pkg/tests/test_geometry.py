import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindc.geometry import (
    EPS_GEOM,
    Ball,
    BoxDomain,
    Circle,
    Degenerate,
    Empty,
    TwoPoints,
    box_edges,
    box_vertices,
    circle_plane_points,
    hyperplane_through_points,
    segment_sphere_intersection,
    sphere_sphere_intersection,
)

coord = st.floats(-5, 5, allow_nan=False)


@st.composite
def boxes(draw, dim=None):
    d = dim or draw(st.integers(1, 4))
    ivs = []
    for _ in range(d):
        a = draw(coord)
        w = draw(st.one_of(st.just(0.0), st.floats(0.01, 4)))
        ivs.append((a, a + w))
    return BoxDomain.from_intervals(ivs)


def _as_set(points):
    return {tuple(np.round(p, 12)) for p in points}


class TestBoxCombinatorics:
    def test_unit_square_vertices(self):
        got = _as_set(box_vertices(BoxDomain.from_intervals([(0, 1), (0, 1)])))
        assert got == {(0, 0), (1, 0), (0, 1), (1, 1)}

    def test_singleton_vertices(self):
        box = BoxDomain.point([1.5, -2.0])
        assert _as_set(box_vertices(box)) == {(1.5, -2.0)}

    def test_cube_has_eight_vertices(self):
        assert len(box_vertices(BoxDomain.from_intervals([(0, 1)] * 3))) == 8

    @pytest.mark.parametrize("dim, count", [(2, 4), (3, 12), (4, 32)])
    def test_edge_counts(self, dim, count):
        assert len(box_edges(BoxDomain.from_intervals([(0, 1)] * dim))) == count

    def test_singleton_has_no_edges(self):
        assert box_edges(BoxDomain.point([0.0, 1.0, 2.0])) == []

    def test_unbounded_rejected(self):
        box = BoxDomain.from_intervals([(0, math.inf), (0, 1)])
        with pytest.raises(ValueError, match="unbounded domain"):
            box_vertices(box)
        with pytest.raises(ValueError, match="unbounded domain"):
            box_edges(box)

    @given(boxes())
    def test_vertex_count_and_edge_endpoints(self, box):
        verts = box_vertices(box)
        free = int(np.sum(box.lo < box.hi))
        assert len(verts) == 2 ** free
        vset = _as_set(verts)
        edges = box_edges(box)
        assert len(edges) == free * 2 ** max(free - 1, 0) if free else not edges
        for e in edges:
            a, b = e.endpoints()
            assert tuple(np.round(a, 12)) in vset
            assert tuple(np.round(b, 12)) in vset


class TestSegmentSphere:
    edge_low = [e for e in box_edges(BoxDomain.from_intervals([(0, 4), (0, 2)]))
                if e.free_axis == 0]

    def _edge(self, y):
        return next(e for e in self.edge_low if e.anchor[1] == y)

    def test_single_crossing(self):
        pts = segment_sphere_intersection(self._edge(0.0), Ball((5.0, -1.0), 2.5))
        assert len(pts) == 1
        assert pts[0] == pytest.approx([5 - math.sqrt(5.25), 0.0])
        assert pts[0][0] == pytest.approx(2.7087, abs=1e-4)

    def test_no_crossing(self):
        assert segment_sphere_intersection(self._edge(2.0), Ball((5.0, -1.0), 2.5)) == []

    def test_two_crossings_through_center(self):
        edge = box_edges(BoxDomain.from_intervals([(-5, 5), (0, 0)]))[0]
        pts = segment_sphere_intersection(edge, Ball((0.5, 0.0), 2.0))
        assert [p[0] for p in pts] == pytest.approx([-1.5, 2.5])

    @given(boxes(), st.lists(coord, min_size=4, max_size=4), st.floats(0.1, 6))
    def test_points_on_segment_and_sphere(self, box, center, radius):
        ball = Ball(np.array(center[:box.dim]), radius)
        for e in box_edges(box):
            pts = segment_sphere_intersection(e, ball)
            assert len(pts) <= 2
            for p in pts:
                assert e.span.lo - EPS_GEOM <= p[e.free_axis] <= e.span.hi + EPS_GEOM
                assert abs(np.linalg.norm(p - ball.center) - radius) <= 1e-6


class TestSphereSphere:
    def test_two_points(self):
        res = sphere_sphere_intersection(Ball((5, -1), 2.5), Ball((5.2, 3), 2.5), 2)
        assert isinstance(res, TwoPoints)
        assert res.p == pytest.approx([3.605, 1.075], abs=1e-3)
        assert res.q == pytest.approx([6.595, 0.925], abs=1e-3)
        for pt in (res.p, res.q):
            assert np.linalg.norm(pt - [5, -1]) == pytest.approx(2.5)
            assert np.linalg.norm(pt - [5.2, 3]) == pytest.approx(2.5)

    def test_far_apart_is_empty(self):
        assert isinstance(sphere_sphere_intersection(Ball((0, 0), 1), Ball((4, 0), 1), 2), Empty)

    def test_nested_is_empty(self):
        assert isinstance(sphere_sphere_intersection(Ball((0, 0), 5), Ball((1, 0), 1), 2), Empty)

    def test_circle_in_3d(self):
        res = sphere_sphere_intersection(Ball((0, 0, 0), 2), Ball((2, 0, 0), 2), 3)
        assert isinstance(res, Circle)
        assert res.center == pytest.approx([1, 0, 0])
        assert res.radius == pytest.approx(math.sqrt(3))
        assert res.axis_normal == pytest.approx([1, 0, 0])

    @pytest.mark.parametrize("b1, b2", [
        (Ball((0, 0), 1), Ball((0, 0), 1)),
        (Ball((0, 0), 1), Ball((2, 0), 1)),
    ])
    def test_degenerate(self, b1, b2):
        assert isinstance(sphere_sphere_intersection(b1, b2, 2), Degenerate)

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            sphere_sphere_intersection(Ball((0,), 1), Ball((1,), 1), 1)

    def test_circle_meets_plane(self):
        circle = sphere_sphere_intersection(Ball((0, 0, 0), 2), Ball((2, 0, 0), 2), 3)
        pts = circle_plane_points(circle, 2, 1.0)
        assert len(pts) == 2
        for p in pts:
            assert p[2] == pytest.approx(1.0)
            assert np.linalg.norm(p) == pytest.approx(2.0)
            assert np.linalg.norm(p - [2, 0, 0]) == pytest.approx(2.0)
        assert circle_plane_points(circle, 2, 2.0) == []

    @given(st.lists(coord, min_size=4, max_size=4), st.floats(0.5, 5), st.floats(0.5, 5))
    def test_symmetric_in_arguments(self, c, r1, r2):
        b1, b2 = Ball(c[:2], r1), Ball(c[2:], r2)
        x, y = sphere_sphere_intersection(b1, b2, 2), sphere_sphere_intersection(b2, b1, 2)
        assert type(x) is type(y)
        if isinstance(x, TwoPoints):
            assert _as_set(np.round([x.p, x.q], 8)) == _as_set(np.round([y.p, y.q], 8))


class TestHyperplane:
    def test_line_through_axis_points(self):
        cut = hyperplane_through_points([(1, 0), (0, 1)])
        s = 1 / math.sqrt(2)
        assert cut.coefs == pytest.approx([s, s])
        assert cut.rhs == pytest.approx(s)

    def test_duplicate_points(self):
        assert hyperplane_through_points([(1, 1), (1, 1)]) is None

    def test_simplex_facet(self):
        cut = hyperplane_through_points(np.eye(3))
        s = 1 / math.sqrt(3)
        assert cut.coefs == pytest.approx([s, s, s])
        assert cut.rhs == pytest.approx(s)

    def test_wrong_count(self):
        with pytest.raises(ValueError):
            hyperplane_through_points([(0, 0, 0), (1, 0, 0)])

    @settings(max_examples=50)
    @given(st.integers(2, 4), st.integers(0, 10_000))
    def test_permutation_invariant(self, dim, seed):
        pts = np.random.default_rng(seed).normal(size=(dim, dim))
        base = hyperplane_through_points(pts)
        if base is None:
            return
        for perm in itertools.permutations(range(dim)):
            other = hyperplane_through_points(pts[list(perm)])
            sign = 1.0 if other.coefs @ base.coefs > 0 else -1.0
            assert sign * other.coefs == pytest.approx(base.coefs, abs=1e-8)
            assert sign * other.rhs == pytest.approx(base.rhs, abs=1e-8)
            assert np.linalg.norm(other.coefs) == pytest.approx(1.0)
        assert pts @ base.coefs == pytest.approx(np.full(dim, base.rhs), abs=1e-8)


def test_open_ball_excludes_boundary():
    ball = Ball((0.0, 0.0), 1.0)
    assert not ball.contains((1.0, 0.0))
    assert ball.contains((0.5, 0.0))
    with pytest.raises(ValueError):
        Ball((0.0,), -1.0)
