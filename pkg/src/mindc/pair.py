"""Domain reductions from two minimum distance constraints sharing a point.

Given ``||y - z1|| >= delta1`` and ``||y - z2|| >= delta2``, a slab ``D'`` of
``D_y`` can be removed when every point of it is too close to ``D_z1`` or
too close to ``D_z2``. Candidate slabs come from a short bisection or, for
``dim`` 2 and 3, from sphere/edge and sphere/sphere intersections; every
candidate is validated before use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import (
    EPS_GEOM,
    Ball,
    BoxDomain,
    Circle,
    TwoPoints,
    box_edges,
    box_vertices,
    circle_plane_points,
    segment_sphere_intersection,
    sphere_sphere_intersection,
)
from .single import EPS_BOUND, BoundChange, BoundKind, MinDC, Side

BISECTION_CHECKS = 3
BISECTION_FIRST_FRACTION = 0.1


@dataclass(frozen=True)
class MinDCPair:
    """Two constraints oriented so that ``c1.y == c2.y`` is the shared point."""

    c1: MinDC
    c2: MinDC

    def __post_init__(self):
        if self.c1.y != self.c2.y:
            raise ValueError("constraints must share their y side")

    @classmethod
    def orient(cls, a: MinDC, b: MinDC) -> "MinDCPair | None":
        for a_, b_ in ((a, b), (a, b.swapped()), (a.swapped(), b), (a.swapped(), b.swapped())):
            if a_.y == b_.y and a_.z != b_.z:
                return cls(a_, b_)
        return None

    @property
    def y(self) -> tuple:
        return self.c1.y

    @property
    def dim(self) -> int:
        return self.c1.dim

    @property
    def variables(self) -> frozenset:
        return self.c1.variables | self.c2.variables


@dataclass(frozen=True)
class CandidateSlab:
    axis: int
    side: Side
    new_bound: float


def register_pairs(mindcs) -> list[MinDCPair]:
    """All unordered pairs of constraints with an identical point on some side."""
    pairs = []
    for a, b in itertools.combinations(mindcs, 2):
        p = MinDCPair.orient(a, b)
        if p is not None:
            pairs.append(p)
    return pairs


def changed_pairs(all_pairs, changed_vars) -> list[MinDCPair]:
    changed = set(changed_vars)
    if not changed:
        return []
    return [p for p in all_pairs if not changed.isdisjoint(p.variables)]


def _near(x, center, radius, tol):
    d = x - center
    return d @ d < radius * radius + tol


def pair_cover_check(Dp: BoxDomain, p, q, delta1: float, delta2: float,
                     tol: float = EPS_GEOM) -> bool:
    """Whether ``Dp`` lies inside ``B_delta1(p) | B_delta2(q)``.

    Only the vertices of ``Dp`` and the points where its edges cross the
    sphere around ``p`` are inspected. Membership accepts points within
    ``tol`` (squared distance) of a sphere, because the removed region is the
    slab without its inner facet.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for v in box_vertices(Dp):
        if not (_near(v, p, delta1, tol) or _near(v, q, delta2, tol)):
            return False
    ball_p = Ball(p, delta1)
    for edge in box_edges(Dp):
        for x in segment_sphere_intersection(edge, ball_p):
            if not _near(x, q, delta2, tol):
                return False
    return True


def pair_cover_check_boxes(Dp: BoxDomain, Dz1: BoxDomain, Dz2: BoxDomain,
                           delta1: float, delta2: float, tol: float = EPS_GEOM) -> bool:
    """Coverage for every vertex pair of ``Dz1 x Dz2``; stops at the first failure."""
    V2 = box_vertices(Dz2)
    for p in box_vertices(Dz1):
        for q in V2:
            if not pair_cover_check(Dp, p, q, delta1, delta2, tol):
                return False
    return True


def _pair_boxes(pair: MinDCPair, bounds: BoxDomain):
    return (bounds.sub(pair.y), bounds.sub(pair.c1.z), bounds.sub(pair.c2.z),
            pair.c1.delta_lb(bounds), pair.c2.delta_lb(bounds))


def slab(Dy: BoxDomain, axis: int, side: Side, new_bound: float) -> BoxDomain:
    """The part of ``Dy`` beyond ``new_bound`` on the given side, facet included."""
    out = Dy.copy()
    if side is Side.UPPER:
        out.lo[axis] = new_bound
    else:
        out.hi[axis] = new_bound
    return out


def validate_slab(pair: MinDCPair, bounds: BoxDomain, axis: int, side: Side,
                  new_bound: float) -> bool:
    Dy, Dz1, Dz2, d1, d2 = _pair_boxes(pair, bounds)
    if d1 <= 0.0 and d2 <= 0.0:
        return False
    return pair_cover_check_boxes(slab(Dy, axis, side, new_bound), Dz1, Dz2, d1, d2)


def _as_change(pair: MinDCPair, axis: int, side: Side, value: float) -> BoundChange:
    kind = BoundKind.LOWER_UPPER if side is Side.UPPER else BoundKind.RAISE_LOWER
    return BoundChange(pair.y[axis], kind, float(value))


def bisection_reduce(pair: MinDCPair, axis: int, side: Side, bounds: BoxDomain,
                     checks: int = BISECTION_CHECKS, cover=None) -> BoundChange | None:
    """Remove a slab found by a bracketing search over the removed fraction.

    The first candidate removes 10% of the interval. Without a failure the
    fraction doubles after each success; without a success it halves after
    each failure; once both are known the midpoint is tried. ``cover`` may
    replace :func:`pair_cover_check_boxes` (same signature).
    """
    cover = cover or pair_cover_check_boxes
    Dy, Dz1, Dz2, d1, d2 = _pair_boxes(pair, bounds)
    lo, hi = Dy[axis]
    width = hi - lo
    if width <= 0.0 or (d1 <= 0.0 and d2 <= 0.0):
        return None
    best, failed = 0.0, None
    frac = BISECTION_FIRST_FRACTION
    for _ in range(checks):
        nb = hi - frac * width if side is Side.UPPER else lo + frac * width
        if cover(slab(Dy, axis, side, nb), Dz1, Dz2, d1, d2):
            best = frac
            frac = 2.0 * frac if failed is None else 0.5 * (frac + failed)
        else:
            failed = frac
            frac = 0.5 * frac if best == 0.0 else 0.5 * (best + frac)
    if best == 0.0:
        return None
    nb = hi - best * width if side is Side.UPPER else lo + best * width
    return _as_change(pair, axis, side, nb)


def geometric_reduce(pair: MinDCPair, axis: int, side: Side, bounds: BoxDomain,
                     eps: float = EPS_BOUND) -> CandidateSlab | None:
    """Guess a new bound from sphere/edge and sphere/sphere intersections (dim 2 or 3).

    The guess is not validated here; callers must check it with
    :func:`validate_slab` before applying it.
    """
    dim = pair.dim
    if dim not in (2, 3):
        raise ValueError("geometric_reduce needs dim 2 or 3")
    Dy, Dz1, Dz2, d1, d2 = _pair_boxes(pair, bounds)
    lo, hi = Dy[axis]
    if hi <= lo:
        return None
    V1 = box_vertices(Dz1)
    V2 = box_vertices(Dz2)
    balls1 = [Ball(p, d1) for p in V1]
    balls2 = [Ball(q, d2) for q in V2]
    heights = []
    for edge in box_edges(Dy):
        if edge.free_axis != axis:
            continue
        for ball in balls1 + balls2:
            heights.extend(float(x[axis]) for x in segment_sphere_intersection(edge, ball))
    for b1 in balls1:
        for b2 in balls2:
            inter = sphere_sphere_intersection(b1, b2, dim)
            if isinstance(inter, TwoPoints):
                for x in (inter.p, inter.q):
                    if lo <= x[axis] <= hi:
                        heights.append(float(x[axis]))
            elif isinstance(inter, Circle):
                for k in range(dim):
                    if k == axis:
                        continue
                    for val in (Dy.lo[k], Dy.hi[k]):
                        for x in circle_plane_points(inter, k, val):
                            if Dy.contains(x, tol=EPS_GEOM):
                                heights.append(float(x[axis]))
    if not heights:
        return None
    if side is Side.UPPER:
        nb = max(heights)
        if lo < nb < hi - eps:
            return CandidateSlab(axis, side, nb)
    else:
        nb = min(heights)
        if lo + eps < nb < hi:
            return CandidateSlab(axis, side, nb)
    return None


def pair_reductions(pair: MinDCPair, bounds: BoxDomain, cover=None) -> list[tuple[str, BoundChange]]:
    """Validated changes over every axis and side, tagged ``"geo"`` or ``"bisect"``.

    Geometric guesses are used for dim 2 and 3, bisection otherwise. Each
    change is computed against the input ``bounds``.
    """
    cover = cover or pair_cover_check_boxes
    out = []
    Dy, Dz1, Dz2, d1, d2 = _pair_boxes(pair, bounds)
    if d1 <= 0.0 and d2 <= 0.0:
        return out
    for axis in range(pair.dim):
        if Dy.hi[axis] <= Dy.lo[axis]:
            continue
        for side in (Side.LOWER, Side.UPPER):
            # every removable slab contains the facet itself
            facet_at = Dy.hi[axis] if side is Side.UPPER else Dy.lo[axis]
            if not cover(slab(Dy, axis, side, facet_at), Dz1, Dz2, d1, d2):
                continue
            if pair.dim in (2, 3):
                cand = geometric_reduce(pair, axis, side, bounds)
                if cand is not None and cover(slab(Dy, axis, side, cand.new_bound), Dz1, Dz2, d1, d2):
                    out.append(("geo", _as_change(pair, axis, side, cand.new_bound)))
            else:
                ch = bisection_reduce(pair, axis, side, bounds, cover=cover)
                if ch is not None:
                    out.append(("bisect", ch))
    return out
