"""Reductions and cuts derived from one minimum distance constraint.

A constraint ``||y - z||^2 >= delta^2`` is weakened to the current lower
bound of ``delta`` before any reduction is derived, so every routine here
works with a fixed radius ``dbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import Infeasible
from .geometry import (
    EPS_GEOM,
    Ball,
    BoxDomain,
    BoxEdge,
    Interval,
    LinearCut,
    box_edges,
    box_vertices,
    hyperplane_through_points,
    segment_sphere_intersection,
)

EPS_BOUND = 1e-7


class Side(Enum):
    LOWER = "lower"
    UPPER = "upper"


class BoundKind(Enum):
    RAISE_LOWER = "raise_lower"
    LOWER_UPPER = "lower_upper"


@dataclass(frozen=True)
class BoundChange:
    var: int
    kind: BoundKind
    value: float


@dataclass(frozen=True)
class MinDC:
    """``||x[y] - x[z]||^2 >= delta^2`` with a constant or variable ``delta``."""

    y: tuple
    z: tuple
    delta: float = 0.0
    delta_var: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(int(i) for i in self.y))
        object.__setattr__(self, "z", tuple(int(i) for i in self.z))
        if len(self.y) != len(self.z) or not self.y:
            raise ValueError("y and z must have equal positive length")
        if any(a == b for a, b in zip(self.y, self.z)):
            raise ValueError("y and z must differ position-wise")
        if self.delta_var is None and self.delta < 0:
            raise ValueError("constant delta must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.y)

    @property
    def variables(self) -> frozenset:
        vs = set(self.y) | set(self.z)
        if self.delta_var is not None:
            vs.add(self.delta_var)
        return frozenset(vs)

    def delta_lb(self, bounds: BoxDomain) -> float:
        if self.delta_var is None:
            return float(self.delta)
        return max(0.0, float(bounds.lo[self.delta_var]))

    def swapped(self) -> "MinDC":
        return MinDC(self.z, self.y, self.delta, self.delta_var)


@dataclass(frozen=True)
class DeltaVector:
    values: np.ndarray
    dists: np.ndarray


def apply_changes(bounds: BoxDomain, changes, tol: float = EPS_BOUND) -> BoxDomain:
    """Copy of ``bounds`` with ``changes`` applied; raises Infeasible on an empty result."""
    out = bounds.copy()
    for ch in changes:
        if ch.kind is BoundKind.RAISE_LOWER:
            out.lo[ch.var] = max(out.lo[ch.var], ch.value)
        else:
            out.hi[ch.var] = min(out.hi[ch.var], ch.value)
        if out.lo[ch.var] > out.hi[ch.var]:
            if out.lo[ch.var] - out.hi[ch.var] > tol:
                raise Infeasible(f"empty domain for variable {ch.var}")
            mid = 0.5 * (out.lo[ch.var] + out.hi[ch.var])
            out.lo[ch.var] = out.hi[ch.var] = mid
    return out


def _yz_bounds(c: MinDC, bounds: BoxDomain):
    y = np.asarray(c.y)
    z = np.asarray(c.z)
    ly, uy, lz, uz = bounds.lo[y], bounds.hi[y], bounds.lo[z], bounds.hi[z]
    if not (np.all(np.isfinite(ly)) and np.all(np.isfinite(uy))
            and np.all(np.isfinite(lz)) and np.all(np.isfinite(uz))):
        raise ValueError("unbounded domain")
    return ly, uy, lz, uz


def compute_deltas(c: MinDC, bounds: BoxDomain) -> DeltaVector:
    """Per-axis separation forced by the weakened constraint.

    ``dists[i]`` is the largest possible ``|y_i - z_i|`` over the box and
    ``values[j] = sqrt(max(0, dbar^2 - sum_{i != j} dists[i]^2))``, so every
    feasible pair satisfies ``|y_j - z_j| >= values[j]``.
    """
    ly, uy, lz, uz = _yz_bounds(c, bounds)
    dbar = c.delta_lb(bounds)
    dists = np.maximum(np.abs(uy - lz), np.abs(uz - ly))
    sq = dists * dists
    values = np.empty_like(dists)
    for j in range(dists.shape[0]):
        others = float(np.sum(np.delete(sq, j)))
        values[j] = math.sqrt(max(0.0, dbar * dbar - others))
    return DeltaVector(values, dists)


def delta_upper_bound(c: MinDC, bounds: BoxDomain) -> float:
    """Largest distance between any ``y`` in ``D_y`` and ``z`` in ``D_z``."""
    ly, uy, lz, uz = _yz_bounds(c, bounds)
    dists = np.maximum(np.abs(uy - lz), np.abs(uz - ly))
    return math.sqrt(float(dists @ dists))


def _interval_rules(ly, uy, lz, uz, delta):
    """New (ly, uy, lz, uz) for one axis given the forced separation ``delta``."""
    if uy <= lz:
        return ly, min(uy, uz - delta), max(lz, ly + delta), uz
    if uz <= ly:
        return max(ly, lz + delta), uy, lz, min(uz, uy - delta)
    if (lz <= ly and uy <= uz) or (ly <= lz and uz <= uy):
        # nesting: nothing to tighten, emptiness is caught by the distance check
        return ly, uy, lz, uz
    if lz < ly <= uz < uy:
        if uz - ly < delta and uy - uz < delta:
            uz = min(uz, uy - delta)
        if ly - lz < delta and uz - ly < delta:
            ly = max(ly, lz + delta)
        return ly, uy, lz, uz
    # ly < lz <= uy < uz
    if uy - lz < delta and uz - uy < delta:
        uy = min(uy, uz - delta)
    if lz - ly < delta and uy - lz < delta:
        lz = max(lz, ly + delta)
    return ly, uy, lz, uz


def propagate_prop1(c: MinDC, bounds: BoxDomain, eps: float = EPS_BOUND) -> list[BoundChange]:
    """Interval tightenings implied by the per-axis separations.

    Raises :class:`Infeasible` when no pair in ``D_y x D_z`` is far enough apart.
    """
    dv = compute_deltas(c, bounds)
    dbar = c.delta_lb(bounds)
    if math.sqrt(float(dv.dists @ dv.dists)) < dbar - eps:
        raise Infeasible("boxes too close for the minimum distance")
    changes = []
    for j, delta in enumerate(dv.values):
        if delta <= 0.0:
            continue
        yj, zj = c.y[j], c.z[j]
        old = (bounds.lo[yj], bounds.hi[yj], bounds.lo[zj], bounds.hi[zj])
        new = _interval_rules(*old, delta)
        for var, is_lower, before, after in (
            (yj, True, old[0], new[0]),
            (yj, False, old[1], new[1]),
            (zj, True, old[2], new[2]),
            (zj, False, old[3], new[3]),
        ):
            if is_lower and after > before + eps:
                changes.append(BoundChange(var, BoundKind.RAISE_LOWER, float(after)))
            elif not is_lower and after < before - eps:
                changes.append(BoundChange(var, BoundKind.LOWER_UPPER, float(after)))
    apply_changes(bounds, changes, tol=eps)
    return changes


def in_C(point, Dz: BoxDomain, dbar: float, eps: float = EPS_GEOM) -> bool:
    """Whether ``point`` is strictly closer than ``dbar`` to every vertex of ``Dz``."""
    p = np.asarray(point, dtype=float)
    far = np.maximum(np.abs(p - Dz.lo), np.abs(p - Dz.hi))
    return bool(far @ far < dbar * dbar - eps)


def locatelli_shrink(c: MinDC, bounds: BoxDomain, axis: int, side: Side,
                     eps: float = EPS_BOUND) -> BoundChange | None:
    """Largest facet-aligned slab of ``D_y`` lying inside ``C(D_z, dbar)``.

    The slab at the ``side`` facet of ``axis`` is removed by moving that bound
    to the deepest entry point of the edges parallel to ``axis`` into the
    balls around the vertices of ``D_z``. Raises :class:`Infeasible` if all of
    ``D_y`` lies inside ``C``.
    """
    dbar = c.delta_lb(bounds)
    Dy = bounds.sub(c.y)
    Dz = bounds.sub(c.z)
    if not (Dy.is_finite() and Dz.is_finite()):
        raise ValueError("unbounded domain")
    lo, hi = Dy[axis]
    if dbar <= 0.0:
        return None
    if all(in_C(v, Dz, dbar) for v in box_vertices(Dy)):
        raise Infeasible("box lies inside C(D_z, dbar)")
    if lo == hi:
        return None
    upper = side is Side.UPPER
    facet_val = hi if upper else lo
    face = Dy.copy()
    face.lo[axis] = face.hi[axis] = facet_val
    if not all(in_C(v, Dz, dbar) for v in box_vertices(face)):
        return None
    best = lo if upper else hi
    balls = [Ball(zv, dbar) for zv in box_vertices(Dz)]
    for edge in box_edges(Dy):
        if edge.free_axis != axis:
            continue
        for ball in balls:
            for p in segment_sphere_intersection(edge, ball):
                t = float(p[axis])
                if upper and t < facet_val:
                    best = max(best, t)
                elif not upper and t > facet_val:
                    best = min(best, t)
    var = c.y[axis]
    if upper and best < hi - eps:
        return BoundChange(var, BoundKind.LOWER_UPPER, best)
    if not upper and best > lo + eps:
        return BoundChange(var, BoundKind.RAISE_LOWER, best)
    return None


def simplex_cut(v, c: MinDC, bounds: BoxDomain, eps: float = EPS_GEOM) -> LinearCut | None:
    """Cut off vertex ``v`` of ``D_y`` with the facet of a simplex inside ``C``.

    Returns ``a . y >= b`` over the ``y`` variables of ``c`` with ``a . v < b``.
    """
    v = np.asarray(v, dtype=float)
    Dy = bounds.sub(c.y)
    Dz = bounds.sub(c.z)
    dbar = c.delta_lb(bounds)
    if np.any(Dy.widths <= 0) or not in_C(v, Dz, dbar):
        return None
    balls = [Ball(zv, dbar) for zv in box_vertices(Dz)]
    far_points = []
    for axis in range(Dy.dim):
        from_lo = v[axis] == Dy.lo[axis]
        end = Dy.hi[axis] if from_lo else Dy.lo[axis]
        span = (v[axis], end) if from_lo else (end, v[axis])
        edge = BoxEdge(v.copy(), axis, Interval(float(span[0]), float(span[1])))
        best_t = end
        for ball in balls:
            for p in segment_sphere_intersection(edge, ball):
                t = float(p[axis])
                if abs(t - v[axis]) < abs(best_t - v[axis]):
                    best_t = t
        if abs(best_t - v[axis]) <= eps:
            return None
        p = v.copy()
        p[axis] = best_t
        far_points.append(p)
    plane = hyperplane_through_points(far_points)
    if plane is None:
        return None
    a, b = plane.coefs, plane.rhs
    if a @ v > b:
        a, b = -a, -b
    if b - a @ v <= eps:
        return None
    return LinearCut(c.y, a, b, local=True, origin="simplex")
