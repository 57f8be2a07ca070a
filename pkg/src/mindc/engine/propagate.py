"""Bound propagation for one search node.

:func:`propagate_node` runs rounds of all propagators until no bound moves
by more than ``EPS_BOUND`` (or 50 rounds pass). Inside a round the order is
fixed: variable links, ball containment, sphere membership, linear cuts
(with rotation cut separation), the per-axis minDC rules, facet slab
removal, pair reductions and lexicographic ordering.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter

import numpy as np

from .. import kernels
from ..errors import Infeasible
from ..geometry import EPS_GEOM, BoxDomain, LinearCut, box_vertices
from ..pair import changed_pairs, pair_reductions, register_pairs
from ..single import EPS_BOUND, BoundChange, BoundKind, in_C, simplex_cut
from ..symmetry import (
    PointMatrixLayout,
    lex_cols_propagate,
    lex_rows_propagate,
    separate_rotation_cuts,
)
from .model import BallContainment, Instance, SphereMembership, mindc_arrays

MAX_ROUNDS = 50
POOL_CAP = 200


class PropStatus(enum.Enum):
    FIXPOINT = "fixpoint"
    INFEASIBLE = "infeasible"


# --------------------------------------------------------------------------
# single-constraint propagators (pure: they return changes)

def _changes(var, new_lo, new_hi, bounds, eps, out):
    if new_lo > bounds.lo[var] + eps:
        out.append(BoundChange(int(var), BoundKind.RAISE_LOWER, float(new_lo)))
    if new_hi < bounds.hi[var] - eps:
        out.append(BoundChange(int(var), BoundKind.LOWER_UPPER, float(new_hi)))
    if min(new_hi, bounds.hi[var]) < max(new_lo, bounds.lo[var]) - eps:
        raise Infeasible(f"empty domain for variable {var}")


def propagate_linear_cut(cut: LinearCut, bounds: BoxDomain,
                         eps: float = EPS_BOUND) -> list[BoundChange]:
    """Interval consequences of ``cut.coefs . x[cut.vars] >= cut.rhs``."""
    idx = list(cut.vars)
    a = cut.coefs
    lo, hi = bounds.lo[idx], bounds.hi[idx]
    best = np.where(a > 0, a * hi, a * lo)
    total = float(best.sum())
    if total < cut.rhs - eps:
        raise Infeasible("linear cut cannot be satisfied")
    out = []
    for k, v in enumerate(idx):
        if a[k] == 0.0:
            continue
        residual = cut.rhs - (total - best[k])
        bound = residual / a[k]
        if a[k] > 0:
            _changes(v, bound, hi[k], bounds, eps, out)
        else:
            _changes(v, lo[k], bound, bounds, eps, out)
    return out


def _min_max_sq(lo, hi, center):
    near = np.clip(center, lo, hi)
    mn = (near - center) ** 2
    mx = np.maximum((lo - center) ** 2, (hi - center) ** 2)
    return mn, mx


def propagate_ball_containment(ball: BallContainment, bounds: BoxDomain,
                               eps: float = EPS_BOUND) -> list[BoundChange]:
    """Coordinate ranges implied by ``||x - c|| <= R`` and, for an affine
    radius, the radius variable range implied by the nearest box point."""
    idx = list(ball.vars)
    c = np.asarray(ball.center)
    lo, hi = bounds.lo[idx], bounds.hi[idx]
    R = ball.radius_max(bounds)
    mn, _ = _min_max_sq(lo, hi, c)
    total = float(mn.sum())
    if R < -eps or total > max(R, 0.0) ** 2 + eps:
        raise Infeasible("box outside the containing ball")
    R = max(R, 0.0)
    out = []
    for j, v in enumerate(idx):
        room = R * R - (total - mn[j])
        r = math.sqrt(max(room, 0.0))
        _changes(v, c[j] - r, c[j] + r, bounds, eps, out)
    if ball.radius_var is not None and ball.radius_coef != 0.0:
        need = math.sqrt(total)
        t = (need - ball.radius_const) / ball.radius_coef
        rv = ball.radius_var
        if ball.radius_coef > 0:
            _changes(rv, t, bounds.hi[rv], bounds, eps, out)
        else:
            _changes(rv, bounds.lo[rv], t, bounds, eps, out)
    return out


def _hull_outside(l, u, g):
    """Hull of ``[l, u]`` minus the open interval ``(-g, g)``; None if empty."""
    parts = []
    if l <= -g:
        parts.append((l, min(u, -g)))
    if u >= g:
        parts.append((max(l, g), u))
    if not parts:
        return None
    return min(p[0] for p in parts), max(p[1] for p in parts)


def propagate_sphere_membership(sphere: SphereMembership, bounds: BoxDomain,
                                eps: float = EPS_BOUND) -> list[BoundChange]:
    idx = list(sphere.vars)
    c = np.asarray(sphere.center)
    lo, hi = bounds.lo[idx], bounds.hi[idx]
    inner = max(sphere.radius - sphere.band, 0.0) ** 2
    outer = (sphere.radius + sphere.band) ** 2
    mn, mx = _min_max_sq(lo, hi, c)
    smin, smax = float(mn.sum()), float(mx.sum())
    if smin > outer + eps or smax < inner - eps:
        raise Infeasible("box misses the sphere")
    out = []
    for j, v in enumerate(idx):
        top = math.sqrt(max(outer - (smin - mn[j]), 0.0))
        l, u = max(lo[j] - c[j], -top), min(hi[j] - c[j], top)
        gap = inner - (smax - mx[j])
        if gap > 0.0:
            hull = _hull_outside(l, u, math.sqrt(gap))
            if hull is None:
                raise Infeasible("box misses the sphere")
            l, u = hull
        _changes(v, c[j] + l, c[j] + u, bounds, eps, out)
    return out


# --------------------------------------------------------------------------
# node state

class PropagationContext:
    """Per-solve data shared by all nodes: compiled arrays, pairs, cut pool, counters."""

    def __init__(self, instance: Instance, settings):
        self.instance = instance
        self.settings = settings
        self.arrays = mindc_arrays(instance.mindcs)
        positions = np.zeros(instance.num_vars, dtype=bool)
        for c in instance.mindcs:
            positions[list(c.y)] = True
            positions[list(c.z)] = True
        self.position_mask = positions
        self.pairs = register_pairs(instance.mindcs) if settings.pair else []
        self.pool: list[LinearCut] = []
        self._pool_keys: set = set()
        self.counters: Counter = Counter()
        self.cuts_added = 0
        self.cutoff = -math.inf
        self.last_rounds = 0
        layout = instance.layout
        self.rotation = bool(settings.rotsym and instance.rotation_symmetric
                             and layout is not None and layout.dim >= 2)
        self.lex_rows = bool(settings.lex_rows and instance.lex_rows and layout is not None)
        self.lex_cols = bool(settings.lex_cols and instance.lex_cols and layout is not None)

    def add_pool_cut(self, cut: LinearCut) -> bool:
        key = (cut.vars, tuple(np.round(cut.coefs, 12)), round(cut.rhs, 12))
        if key in self._pool_keys:
            return False
        self._pool_keys.add(key)
        self.pool.append(cut)
        if len(self.pool) > POOL_CAP:
            old = self.pool.pop(0)
            self._pool_keys.discard((old.vars, tuple(np.round(old.coefs, 12)), round(old.rhs, 12)))
        self.cuts_added += 1
        return True

    def cover(self, Dp, Dz1, Dz2, d1, d2) -> bool:
        P = np.array(box_vertices(Dz1))
        Q = np.array(box_vertices(Dz2))
        return bool(kernels.cover_check(Dp.lo, Dp.hi, P, Q, float(d1), float(d2), EPS_GEOM))


def _apply(bounds: BoxDomain, changes, eps: float = EPS_BOUND) -> int:
    n = 0
    for ch in changes:
        v = ch.var
        if ch.kind is BoundKind.RAISE_LOWER:
            if ch.value > bounds.lo[v] + eps:
                bounds.lo[v] = ch.value
                n += 1
        elif ch.value < bounds.hi[v] - eps:
            bounds.hi[v] = ch.value
            n += 1
        if bounds.lo[v] > bounds.hi[v]:
            if bounds.lo[v] - bounds.hi[v] > eps:
                raise Infeasible(f"empty domain for variable {v}")
            bounds.lo[v] = bounds.hi[v] = 0.5 * (bounds.lo[v] + bounds.hi[v])
    return n


def _sync_links(instance: Instance, bounds: BoxDomain) -> None:
    changes = []
    for link in instance.links:
        s = link.scale
        changes.append(BoundChange(link.var, BoundKind.RAISE_LOWER, s * bounds.lo[link.source]))
        changes.append(BoundChange(link.var, BoundKind.LOWER_UPPER, s * bounds.hi[link.source]))
        changes.append(BoundChange(link.source, BoundKind.RAISE_LOWER, bounds.lo[link.var] / s))
        changes.append(BoundChange(link.source, BoundKind.LOWER_UPPER, bounds.hi[link.var] / s))
    _apply(bounds, changes)


def _rotation_points(layout: PointMatrixLayout, bounds: BoxDomain):
    """Box midpoint and the corners of every row-0 coordinate face."""
    mid = bounds.midpoint
    yield mid
    for j, jp in itertools.combinations(range(layout.dim), 2):
        vj, vjp = layout.var_of(0, j), layout.var_of(0, jp)
        for a, b in itertools.product((bounds.lo[vj], bounds.hi[vj]), (bounds.lo[vjp], bounds.hi[vjp])):
            p = mid.copy()
            p[vj], p[vjp] = a, b
            yield p


def _separate_rotation(ctx: PropagationContext, bounds: BoxDomain, local_cuts: list) -> list[LinearCut]:
    layout = ctx.instance.layout
    fresh = []
    for point in _rotation_points(layout, bounds):
        for cut in separate_rotation_cuts(layout, point, bounds):
            if cut.local:
                local_cuts.append(cut)
                ctx.cuts_added += 1
                fresh.append(cut)
            elif ctx.add_pool_cut(cut):
                fresh.append(cut)
    return fresh


def _simplex_cuts(ctx: PropagationContext, bounds: BoxDomain) -> list[LinearCut]:
    out = []
    for c in ctx.instance.mindcs:
        for cc in (c, c.swapped()):
            dbar = cc.delta_lb(bounds)
            if dbar <= 0.0:
                continue
            Dy, Dz = bounds.sub(cc.y), bounds.sub(cc.z)
            for v in box_vertices(Dy):
                if in_C(v, Dz, dbar):
                    cut = simplex_cut(v, cc, bounds)
                    if cut is not None:
                        out.append(cut)
    ctx.cuts_added += len(out)
    return out


def _run_kernel(result: int) -> int:
    if result == kernels.INFEASIBLE:
        raise Infeasible("minimum distance constraint cannot be met")
    return result


def _round(node, ctx: PropagationContext, pending: set, separate_simplex: bool) -> set:
    inst, settings, bounds = ctx.instance, ctx.settings, node.bounds
    start_lo, start_hi = bounds.lo.copy(), bounds.hi.copy()

    def moved():
        return set(np.flatnonzero((bounds.lo != start_lo) | (bounds.hi != start_hi)).tolist())

    _sync_links(inst, bounds)
    for ball in inst.balls:
        _apply(bounds, propagate_ball_containment(ball, bounds))
    for sphere in inst.spheres:
        _apply(bounds, propagate_sphere_membership(sphere, bounds))

    if separate_simplex:
        node.local_cuts.extend(_simplex_cuts(ctx, bounds))
    if ctx.rotation:
        _separate_rotation(ctx, bounds, node.local_cuts)
    for cut in itertools.chain(inst.static_cuts, ctx.pool, node.local_cuts):
        _apply(bounds, propagate_linear_cut(cut, bounds))
    _sync_links(inst, bounds)

    positions = settings.heur is not None
    for Y, Z, dconst, dvar in ctx.arrays.values():
        ctx.counters["prop1"] += _run_kernel(kernels.prop1_sweep(
            bounds.lo, bounds.hi, Y, Z, dconst, dvar, positions, EPS_BOUND, ctx.position_mask))
    if settings.heur == 0:
        for Y, Z, dconst, dvar in ctx.arrays.values():
            ctx.counters["locatelli"] += _run_kernel(kernels.locatelli_sweep(
                bounds.lo, bounds.hi, Y, Z, dconst, dvar, EPS_BOUND, EPS_GEOM, ctx.position_mask))
    _sync_links(inst, bounds)

    if ctx.pairs and settings.heur is not None:
        for pair in changed_pairs(ctx.pairs, pending | moved()):
            for tag, ch in pair_reductions(pair, bounds, cover=ctx.cover):
                n = _apply(bounds, [ch])
                ctx.counters["pair_geo" if tag == "geo" else "pair_bisect"] += n

    layout = inst.layout
    if ctx.lex_rows:
        _apply(bounds, lex_rows_propagate(layout, bounds))
    if ctx.lex_cols:
        _apply(bounds, lex_cols_propagate(layout, bounds))
    return moved()


def propagate_node(node, instance: Instance, settings, ctx: PropagationContext | None = None) -> PropStatus:
    """Tighten ``node.bounds`` in place until a fixpoint; report infeasibility.

    ``node.changed_vars`` seeds the pair filter of the first round and
    collects every variable tightened here.
    """
    ctx = ctx or PropagationContext(instance, settings)
    bounds = node.bounds
    obj = instance.objective_var
    if ctx.cutoff > bounds.lo[obj]:
        if ctx.cutoff > bounds.hi[obj] + EPS_BOUND:
            return PropStatus.INFEASIBLE
        bounds.lo[obj] = min(ctx.cutoff, bounds.hi[obj])
    freq = settings.cutfreq
    simplex_here = freq > 0 and node.depth % freq == 0
    pending = set(node.changed_vars)
    try:
        for rnd in range(MAX_ROUNDS):
            ctx.last_rounds = rnd + 1
            moved = _round(node, ctx, pending, simplex_here and rnd == 0)
            node.changed_vars |= moved
            if not moved:
                break
            pending = moved
    except Infeasible:
        return PropStatus.INFEASIBLE
    node.local_upper = float(bounds.hi[obj])
    return PropStatus.FIXPOINT
