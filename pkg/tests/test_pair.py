import math

import numpy as np
import pytest
from _gen import random_pair
from hypothesis import given, settings
from hypothesis import strategies as st

from mindc.geometry import Ball, BoxDomain, box_vertices
from mindc.oracle import SamplingPlan, grid_cover_check, reduction_soundness_check
from mindc.pair import (
    MinDCPair,
    bisection_reduce,
    changed_pairs,
    geometric_reduce,
    pair_cover_check,
    pair_cover_check_boxes,
    pair_reductions,
    register_pairs,
    slab,
    validate_slab,
)
from mindc.single import BoundKind, MinDC, Side, apply_changes, locatelli_shrink

UNIT = BoxDomain.from_intervals([(0, 1), (0, 1)])


def two_ball_corner():
    """D_y = [0,4]x[0,2], z1 = (5,-1), z2 = (5.2,3), both radii 2.5."""
    bounds = BoxDomain.from_intervals([(0, 4), (0, 2), (5, 5), (-1, -1), (5.2, 5.2), (3, 3)])
    pair = MinDCPair(MinDC((0, 1), (2, 3), 2.5), MinDC((0, 1), (4, 5), 2.5))
    return pair, bounds


class TestCover:
    def test_covered(self):
        assert pair_cover_check(UNIT, (0, 0), (1, 1), 1.2, 1.2)

    def test_vertex_uncovered(self):
        assert not pair_cover_check(UNIT, (0, 0), (1, 1), 0.9, 0.9)

    def test_single_ball(self):
        assert pair_cover_check(UNIT, (0.5, 0.5), (9, 9), 1.0, 0.1)

    def test_edge_crossing_uncovered(self):
        # vertices covered, but the gap between the two balls crosses the box
        box = BoxDomain.from_intervals([(0, 4), (0, 0.1)])
        assert not pair_cover_check(box, (0, 0), (4, 0), 1.9, 1.9)
        assert pair_cover_check(box, (0, 0), (4, 0), 2.1, 2.1)

    def test_singleton_boxes_match_base(self):
        for r in (0.9, 1.2):
            assert pair_cover_check_boxes(UNIT, BoxDomain.point((0, 0)), BoxDomain.point((1, 1)),
                                          r, r) == pair_cover_check(UNIT, (0, 0), (1, 1), r, r)

    def test_boxes_need_every_vertex_pair(self):
        Dz1 = BoxDomain.from_intervals([(0, 0), (0, 0)])
        Dz2 = BoxDomain.from_intervals([(1, 3), (1, 1)])
        assert not pair_cover_check_boxes(UNIT, Dz1, Dz2, 1.2, 1.2)

    @pytest.mark.parametrize("r, expect", [(1.2, True), (0.9, False)])
    def test_grid_agrees(self, r, expect):
        balls = [Ball((0, 0), r), Ball((1, 1), r)]
        assert grid_cover_check(UNIT, balls, 200) is expect

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_grid_agrees_random(self, seed):
        rng = np.random.default_rng(seed)
        Dp = BoxDomain.from_intervals([(0, rng.uniform(0.2, 2)), (0, rng.uniform(0.2, 2))])
        p, q = rng.uniform(-1, 3, 2), rng.uniform(-1, 3, 2)
        r1, r2 = rng.uniform(0.5, 3, 2)
        fast = pair_cover_check(Dp, p, q, r1, r2)
        grid = grid_cover_check(Dp, [Ball(p, r1), Ball(q, r2)], 120)
        if fast:
            assert grid
        elif grid:
            # disagreement is only allowed when the uncovered set is thin
            assert not grid_cover_check(Dp, [Ball(p, r1), Ball(q, r2)], 600) or \
                not pair_cover_check(Dp, p, q, r1 + 1e-6, r2 + 1e-6)


def _traced_cover(accept):
    """Cover stand-in that accepts removed fractions up to ``accept`` and logs the calls."""
    calls = []

    def cover(Dp, Dz1, Dz2, d1, d2):
        frac = (Dp.hi[0] - Dp.lo[0]) / 10.0
        calls.append(round(frac, 6))
        return frac <= accept + 1e-12
    return cover, calls


class TestBisection:
    def setup_method(self):
        self.bounds = BoxDomain.from_intervals([(0, 10), (0, 1), (20, 20), (0, 0), (30, 30), (0, 0)])
        self.pair = MinDCPair(MinDC((0, 1), (2, 3), 1.0), MinDC((0, 1), (4, 5), 1.0))

    @pytest.mark.parametrize("accept, calls, moved", [
        (0.3, [0.1, 0.2, 0.4], 0.2),
        (0.0, [0.1, 0.05, 0.025], None),
        (1.0, [0.1, 0.2, 0.4], 0.4),
        (0.07, [0.1, 0.05, 0.075], 0.05),
        (0.15, [0.1, 0.2, 0.15], 0.15),
    ])
    def test_schedule(self, accept, calls, moved):
        cover, log = _traced_cover(accept)
        ch = bisection_reduce(self.pair, 0, Side.UPPER, self.bounds, cover=cover)
        assert log == pytest.approx(calls)
        if moved is None:
            assert ch is None
        else:
            assert ch.kind is BoundKind.LOWER_UPPER
            assert ch.value == pytest.approx(10 - 10 * moved)

    def test_lower_side(self):
        cover, _ = _traced_cover(0.3)
        ch = bisection_reduce(self.pair, 0, Side.LOWER, self.bounds, cover=cover)
        assert ch.kind is BoundKind.RAISE_LOWER
        assert ch.value == pytest.approx(2.0)

    def test_zero_width(self):
        b = self.bounds.copy()
        b.hi[0] = 0.0
        cover, log = _traced_cover(1.0)
        assert bisection_reduce(self.pair, 0, Side.UPPER, b, cover=cover) is None
        assert log == []


class TestGeometric:
    def test_corner_guess_and_validation(self):
        pair, bounds = two_ball_corner()
        cand = geometric_reduce(pair, 0, Side.UPPER, bounds)
        assert cand.new_bound == pytest.approx(3.605, abs=1e-3)
        assert validate_slab(pair, bounds, 0, Side.UPPER, cand.new_bound)
        removed = slab(bounds.sub(pair.y), 0, Side.UPPER, cand.new_bound)
        balls = [Ball((5, -1), 2.5), Ball((5.2, 3), 2.5)]
        assert grid_cover_check(removed, balls, 200, eps=-1e-9)

    def test_corner_single_constraint_fails(self):
        pair, bounds = two_ball_corner()
        for c in (pair.c1, pair.c2):
            assert locatelli_shrink(c, bounds, 0, Side.UPPER) is None

    def test_far_balls(self):
        bounds = BoxDomain.from_intervals([(0, 1), (0, 1), (10, 10), (10, 10), (-10, -10), (-10, -10)])
        pair = MinDCPair(MinDC((0, 1), (2, 3), 1.0), MinDC((0, 1), (4, 5), 1.0))
        assert geometric_reduce(pair, 0, Side.UPPER, bounds) is None

    def test_three_dim_circle_heights(self):
        bounds = BoxDomain.from_intervals([(0, 2), (-1, 1), (-2, 1.5)] + [(0, 0)] * 3
                                          + [(2, 2), (0, 0), (0, 0)])
        pair = MinDCPair(MinDC((0, 1, 2), (3, 4, 5), 2.0), MinDC((0, 1, 2), (6, 7, 8), 2.0))
        cand = geometric_reduce(pair, 2, Side.UPPER, bounds)
        assert cand is not None
        # the circle x=1, y^2 + z^2 = 3 meets the facet y = +-1 at z = sqrt(2)
        assert cand.new_bound == pytest.approx(math.sqrt(2), abs=1e-9)
        # the guess is unsafe here: the facet corner (1, 1, 1.5) is 2.06 from both centers
        assert not validate_slab(pair, bounds, 2, Side.UPPER, cand.new_bound)

    def test_rejects_other_dims(self):
        pair = MinDCPair(MinDC((0,), (1,), 1.0), MinDC((0,), (2,), 1.0))
        with pytest.raises(ValueError):
            geometric_reduce(pair, 0, Side.UPPER, BoxDomain.from_intervals([(0, 1)] * 3))


class TestRegistry:
    def setup_method(self):
        self.cs = [MinDC((0, 1), (2, 3), 1.0), MinDC((0, 1), (4, 5), 1.0),
                   MinDC((2, 3), (4, 5), 1.0)]
        self.pairs = register_pairs(self.cs)

    def test_all_pairs_registered(self):
        assert len(self.pairs) == 3
        for p in self.pairs:
            assert p.c1.y == p.c2.y

    def test_empty_change(self):
        assert changed_pairs(self.pairs, set()) == []

    def test_shared_point_change(self):
        got = changed_pairs(self.pairs, {0})
        assert len(got) == 3
        assert all(0 in p.variables for p in got)

    def test_single_z_change(self):
        pair = MinDCPair(MinDC((0, 1), (2, 3), 1.0), MinDC((0, 1), (4, 5), 1.0))
        other = MinDCPair(MinDC((6, 7), (2, 3), 1.0), MinDC((6, 7), (8, 9), 1.0))
        assert changed_pairs([pair, other], {5}) == [pair]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(0, 10**6))
def test_pair_reductions_sound(d, seed):
    c1, c2, bounds = random_pair(np.random.default_rng(seed), d)
    pair = MinDCPair(c1, c2)
    for tag, ch in pair_reductions(pair, bounds):
        assert tag in ("geo", "bisect")
        after = apply_changes(bounds, [ch])
        bad = reduction_soundness_check(bounds, after, [c1, c2], SamplingPlan(seed=1, samples_per_box=2000))
        assert bad.shape[0] == 0
        Dy = bounds.sub(pair.y)
        axis = pair.y.index(ch.var)
        side = Side.UPPER if ch.kind is BoundKind.LOWER_UPPER else Side.LOWER
        assert pair_cover_check_boxes(slab(Dy, axis, side, ch.value), bounds.sub(c1.z),
                                      bounds.sub(c2.z), c1.delta, c2.delta)
        assert all(Dy.contains(v) for v in box_vertices(slab(Dy, axis, side, ch.value)))
