import math

import numpy as np
import pytest
from _gen import random_single
from hypothesis import given, settings
from hypothesis import strategies as st

from mindc.errors import Infeasible
from mindc.geometry import BoxDomain, box_vertices
from mindc.oracle import SamplingPlan, reduction_soundness_check
from mindc.single import (
    BoundChange,
    BoundKind,
    MinDC,
    Side,
    apply_changes,
    compute_deltas,
    delta_upper_bound,
    in_C,
    locatelli_shrink,
    propagate_prop1,
    simplex_cut,
)

PLAN = SamplingPlan(seed=3, samples_per_box=4000)


def one_d(y, z, delta):
    """Constraint |x0 - x1| >= delta on the given intervals."""
    return MinDC((0,), (1,), delta), BoxDomain.from_intervals([y, z])


def bounds_after(bounds, changes):
    return apply_changes(bounds, changes)


class TestDeltas:
    def test_two_dim_example(self):
        c = MinDC((0, 1), (2, 3), 2.0)
        b = BoxDomain.from_intervals([(0, 1), (0, 1), (3, 4), (0, 1)])
        dv = compute_deltas(c, b)
        assert dv.dists == pytest.approx([4, 1])
        assert dv.values == pytest.approx([math.sqrt(3), 0])

    def test_zero_delta(self):
        c = MinDC((0, 1), (2, 3), 0.0)
        b = BoxDomain.from_intervals([(0, 1)] * 4)
        assert np.all(compute_deltas(c, b).values == 0)

    @pytest.mark.parametrize("y, z", [((0, 1), (5, 9)), ((-3, 3), (0, 0)), ((2, 2), (2, 2))])
    def test_one_dim_is_delta(self, y, z):
        c, b = one_d(y, z, 3.0)
        assert compute_deltas(c, b).values == pytest.approx([3.0])

    def test_variable_delta_reads_lower_bound(self):
        c = MinDC((0,), (1,), delta_var=2)
        b = BoxDomain.from_intervals([(0, 1), (0, 1), (0.7, 5)])
        assert compute_deltas(c, b).values == pytest.approx([0.7])

    def test_unbounded(self):
        c, b = one_d((0, math.inf), (0, 1), 1.0)
        with pytest.raises(ValueError, match="unbounded"):
            compute_deltas(c, b)

    def test_upper_bound_is_max_distance(self):
        c = MinDC((0, 1), (2, 3), 1.0)
        b = BoxDomain.from_intervals([(0, 1), (0, 1), (3, 4), (0, 1)])
        assert delta_upper_bound(c, b) == pytest.approx(math.sqrt(17))

    @given(st.integers(1, 5), st.integers(0, 10**6))
    def test_delta_identity(self, d, seed):
        c, b = random_single(np.random.default_rng(seed), d)
        dv = compute_deltas(c, b)
        assert np.all(dv.values >= 0) and np.all(dv.dists >= 0)
        total = float(np.sum(dv.dists ** 2))
        for j in range(d):
            rest = total - dv.dists[j] ** 2
            if dv.values[j] > 0:
                assert dv.values[j] ** 2 + rest == pytest.approx(c.delta ** 2, rel=1e-9, abs=1e-9)
            else:
                assert c.delta ** 2 <= rest + 1e-9


class TestProp1:
    def test_case_disjoint(self):
        c, b = one_d((0, 5), (5, 6), 2.0)
        after = bounds_after(b, propagate_prop1(c, b))
        assert after.hi[0] == pytest.approx(4.0)
        assert after.lo[1] == pytest.approx(5.0)

    def test_case_nested_infeasible(self):
        c, b = one_d((2, 3), (0, 4), 5.0)
        with pytest.raises(Infeasible):
            propagate_prop1(c, b)

    def test_case_overlap(self):
        c, b = one_d((1, 4), (0, 2), 3.0)
        after = bounds_after(b, propagate_prop1(c, b))
        assert after.hi[1] == pytest.approx(1.0)
        assert after.lo[0] == pytest.approx(3.0)

    def test_nested_with_room_keeps_box(self):
        c, b = one_d((2, 3), (0, 10), 2.0)
        assert propagate_prop1(c, b) == []

    def test_tiny_changes_suppressed(self):
        c, b = one_d((0, 5), (5, 6), 1.0 + 5e-8)
        assert propagate_prop1(c, b) == []

    @pytest.mark.parametrize("y, z, delta", [((0, 5), (5, 6), 2.0), ((1, 4), (0, 2), 3.0)])
    def test_examples_are_sound(self, y, z, delta):
        c, b = one_d(y, z, delta)
        after = bounds_after(b, propagate_prop1(c, b))
        assert reduction_soundness_check(b, after, [c], PLAN).shape[0] == 0

    @settings(max_examples=80)
    @given(st.integers(1, 4), st.integers(0, 10**6), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone(self, d, seed, f_lo, f_hi):
        rng = np.random.default_rng(seed)
        c, big = random_single(rng, d)
        small = big.copy()
        w = small.widths
        small.lo += 0.3 * f_lo * w
        small.hi -= 0.3 * f_hi * w
        try:
            out_big = bounds_after(big, propagate_prop1(c, big))
        except Infeasible:
            out_big = None
        try:
            out_small = bounds_after(small, propagate_prop1(c, small))
        except Infeasible:
            return
        assert out_big is not None, "larger box pruned while the smaller one survived"
        assert out_small.is_subset(out_big, tol=1e-9)


class TestInC:
    def test_vertex_of_small_box(self):
        Dz = BoxDomain.from_intervals([(0, 1), (0, 1)])
        assert in_C((0, 0), Dz, 1.5)
        assert not in_C((0, 0), Dz, 1.4)

    def test_zero_radius(self):
        assert not in_C((0.0,), BoxDomain.point([0.0]), 0.0)

    def test_one_dim(self):
        assert in_C((3.0,), BoxDomain.from_intervals([(4, 5)]), 3.0)


class TestLocatelli:
    def test_one_dim_upper(self):
        c, b = one_d((0, 4), (4, 5), 3.0)
        ch = locatelli_shrink(c, b, 0, Side.UPPER)
        assert ch == BoundChange(0, BoundKind.LOWER_UPPER, pytest.approx(2.0))
        assert locatelli_shrink(c, b, 0, Side.LOWER) is None

    def test_interior_only(self):
        c, b = one_d((0, 10), (4, 5), 3.0)
        assert locatelli_shrink(c, b, 0, Side.UPPER) is None
        assert locatelli_shrink(c, b, 0, Side.LOWER) is None

    def test_everything_too_close(self):
        c, b = one_d((0, 1), (0.5, 0.6), 5.0)
        with pytest.raises(Infeasible):
            locatelli_shrink(c, b, 0, Side.UPPER)

    @given(st.floats(-3, 3), st.floats(0, 3), st.floats(-3, 3), st.floats(0, 1), st.floats(0.1, 4))
    def test_one_dim_closed_form(self, ly, wy, lz, wz, delta):
        c, b = one_d((ly, ly + wy), (lz, lz + wz), delta)
        lo_c, hi_c = lz + wz - delta, lz + delta
        for side in Side:
            try:
                ch = locatelli_shrink(c, b, 0, side)
            except Infeasible:
                assert lo_c < ly and ly + wy < hi_c
                continue
            if ch is None:
                continue
            if side is Side.UPPER:
                assert ch.value == pytest.approx(max(lo_c, ly), abs=1e-9)
            else:
                assert ch.value == pytest.approx(min(hi_c, ly + wy), abs=1e-9)

    @settings(max_examples=60)
    @given(st.integers(2, 3), st.integers(0, 10**6))
    def test_maximal(self, d, seed):
        c, b = random_single(np.random.default_rng(seed), d)
        Dz = b.sub(c.z)
        for axis in range(d):
            for side in Side:
                try:
                    ch = locatelli_shrink(c, b, axis, side)
                except Infeasible:
                    continue
                if ch is None:
                    continue
                Dy = b.sub(c.y)
                lo, hi = Dy[axis]
                step = 1e-4 * (hi - lo)
                grown = Dy.copy()
                if side is Side.UPPER:
                    grown.lo[axis] = grown.hi[axis] = ch.value - step
                else:
                    grown.lo[axis] = grown.hi[axis] = ch.value + step
                if step > 0 and lo <= grown.lo[axis] <= hi:
                    assert not all(in_C(v, Dz, c.delta) for v in box_vertices(grown))


class TestSimplexCut:
    def setup_method(self):
        self.c = MinDC((0, 1), (2, 3), 1.5)
        self.b = BoxDomain.from_intervals([(0, 1), (0, 1), (2, 2), (0, 0)])

    def test_cuts_vertex(self):
        cut = simplex_cut((1, 0), self.c, self.b)
        assert cut is not None
        assert cut.vars == (0, 1)
        assert cut.activity(np.array([1.0, 0.0])) < cut.rhs
        for p in ((0.5, 0.0), (1.0, 1.0)):
            assert cut.activity(np.array(p)) == pytest.approx(cut.rhs)

    def test_vertex_outside_C(self):
        assert simplex_cut((0, 0), self.c, self.b) is None

    def test_degenerate_box(self):
        b = self.b.copy()
        b.lo[1] = b.hi[1] = 0.0
        assert simplex_cut((1, 0), self.c, b) is None
