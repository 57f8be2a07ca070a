"""Brute-force checks used to validate the reductions and the solver.

Nothing here calls the algorithms under test; distances are recomputed
from scratch with plain numpy so that a shared bug cannot hide itself.
Constraint objects are only read through their ``y``, ``z``, ``delta`` and
``delta_var`` attributes; balls through ``center`` and ``radius``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SLACK = 1e-7


@dataclass(frozen=True)
class SamplingPlan:
    seed: int = 0
    samples_per_box: int = 10_000
    grid_resolution: int = 200

    def __post_init__(self):
        if self.samples_per_box < 1 or self.grid_resolution < 1:
            raise ValueError("sample counts must be positive")


def _weakened(constraints, lo):
    out = []
    for c in constraints:
        if c.delta_var is None:
            delta = float(c.delta)
        else:
            delta = max(0.0, float(lo[c.delta_var]))
        out.append((np.asarray(c.y), np.asarray(c.z), delta))
    return out


def _satisfying(points, weakened, slack):
    """Mask of sample rows that satisfy every weakened constraint with room to spare."""
    ok = np.ones(points.shape[0], dtype=bool)
    for y, z, delta in weakened:
        diff = points[:, y] - points[:, z]
        ok &= (diff * diff).sum(axis=1) - delta * delta > slack
    return ok


def _uniform(rng, lo, hi, k):
    return lo + (hi - lo) * rng.random((k, lo.shape[0]))


def _removed_samples(before_lo, before_hi, after_lo, after_hi, plan):
    """Samples of ``before`` outside ``after``: uniform ones plus ones aimed at each removed slab."""
    rng = np.random.default_rng(plan.seed)
    k = plan.samples_per_box
    pts = [_uniform(rng, before_lo, before_hi, k)]
    if after_lo is not None:
        for v in range(before_lo.shape[0]):
            for a, b in ((before_lo[v], after_lo[v]), (after_hi[v], before_hi[v])):
                if b > a:
                    s = _uniform(rng, before_lo, before_hi, max(1, k // 4))
                    s[:, v] = a + (b - a) * rng.random(s.shape[0])
                    pts.append(s)
                    # outer facet of the removed slab, where a box corner may sit
                    edge = _uniform(rng, before_lo, before_hi, max(1, k // 20))
                    edge[:, v] = a if a == before_lo[v] else b
                    pts.append(edge)
    pts = np.vstack(pts)
    if after_lo is None:
        return pts
    inside = np.all((pts >= after_lo) & (pts <= after_hi), axis=1)
    return pts[~inside]


def reduction_soundness_check(before, after, constraints, plan: SamplingPlan = SamplingPlan(),
                              slack: float = SLACK) -> np.ndarray:
    """Sampled points of ``before`` that were removed although they satisfy every constraint.

    ``before``/``after`` expose ``lo``/``hi`` arrays over all variables;
    ``after=None`` means the whole box was declared infeasible. Constraints
    are weakened to the lower bound of their distance variable in ``before``.
    Returns the counterexamples as rows (empty when the reduction is sound).
    """
    blo, bhi = np.asarray(before.lo, float), np.asarray(before.hi, float)
    alo = ahi = None
    if after is not None:
        alo, ahi = np.asarray(after.lo, float), np.asarray(after.hi, float)
        if np.any(alo < blo - 1e-12) or np.any(ahi > bhi + 1e-12):
            raise ValueError("after must lie inside before")
    pts = _removed_samples(blo, bhi, alo, ahi, plan)
    mask = _satisfying(pts, _weakened(constraints, blo), slack)
    return pts[mask]


def cut_soundness_check(bounds, vars_, coefs, rhs, constraints, plan: SamplingPlan = SamplingPlan(),
                        slack: float = SLACK) -> np.ndarray:
    """Sampled points of ``bounds`` cut off by ``coefs . x[vars_] >= rhs`` that satisfy all constraints."""
    lo, hi = np.asarray(bounds.lo, float), np.asarray(bounds.hi, float)
    rng = np.random.default_rng(plan.seed)
    pts = _uniform(rng, lo, hi, plan.samples_per_box)
    # extra samples near the box corners, where vertex cuts act
    corners = rng.integers(0, 2, size=(plan.samples_per_box, lo.shape[0])).astype(bool)
    near = np.where(corners, hi, lo) + (np.where(corners, -1.0, 1.0) * (hi - lo)
                                        * 0.2 * rng.random((plan.samples_per_box, lo.shape[0])))
    pts = np.vstack([pts, near])
    act = pts[:, list(vars_)] @ np.asarray(coefs, float)
    removed = pts[act < rhs]
    mask = _satisfying(removed, _weakened(constraints, lo), slack)
    return removed[mask]


def _grid(lo, hi, resolution):
    axes = [np.linspace(a, b, resolution) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lo.shape[0])


def grid_cover_check(Dp, balls, resolution: int = 200, eps: float = 0.0) -> bool:
    """Whether every point of a regular grid over ``Dp`` lies in some open ball."""
    lo, hi = np.asarray(Dp.lo, float), np.asarray(Dp.hi, float)
    if np.any(lo > hi):
        return True
    if not balls:
        return False
    grid = _grid(lo, hi, resolution)
    covered = np.zeros(grid.shape[0], dtype=bool)
    for ball in balls:
        c = np.asarray(ball.center, float)
        d2 = ((grid - c) ** 2).sum(axis=1)
        covered |= d2 < float(ball.radius) ** 2 - eps
    return bool(covered.all())


def grid_boundary_distance(Dp, balls, resolution: int = 200) -> float:
    """Smallest distance from a grid point of ``Dp`` to any ball boundary."""
    grid = _grid(np.asarray(Dp.lo, float), np.asarray(Dp.hi, float), resolution)
    best = math.inf
    for ball in balls:
        d = np.sqrt(((grid - np.asarray(ball.center, float)) ** 2).sum(axis=1))
        best = min(best, float(np.min(np.abs(d - float(ball.radius)))))
    return best


def kissing_optimum_2d(n: int) -> float:
    """Largest ``r`` with ``n`` points on the circle of radius 2 pairwise ``2 r`` apart."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return 2.0 * math.sin(math.pi / n)


def pack_in_box_diagonal(dim: int, steps: int = 200_000) -> float:
    """Two equal spheres in the unit cube, centers on the main diagonal (1-parameter scan)."""
    r = np.linspace(0.0, 0.5, steps)
    # centers at (r, .., r) and (1 - r, .., 1 - r)
    dist = math.sqrt(dim) * (1.0 - 2.0 * r)
    ok = dist >= 2.0 * r
    return float(r[ok].max())


def spherical_code_radius(n: int, dim: int, starts: int = 40, iters: int = 3000, seed: int = 0) -> float:
    """Numerical kissing radius: half the best minimum distance of ``n`` points on the radius-2 sphere.

    Multi-start repulsion with a shrinking step; accurate to a few 1e-6
    for small ``n``.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    iu = np.triu_indices(n, 1)
    for _ in range(starts):
        x = rng.normal(size=(n, dim))
        x *= 2.0 / np.linalg.norm(x, axis=1, keepdims=True)
        step = 0.1
        for _ in range(iters):
            diff = x[:, None, :] - x[None, :, :]
            d2 = (diff ** 2).sum(axis=2) + np.eye(n)
            force = (diff / d2[..., None] ** 4).sum(axis=1)
            x += step * force / (np.abs(force).max() + 1e-300)
            x *= 2.0 / np.linalg.norm(x, axis=1, keepdims=True)
            step *= 0.998
        d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))[iu].min()
        best = max(best, float(d) / 2.0)
    return best


def grid_pair_cover_check(Dp, P, Q, delta1: float, delta2: float, resolution: int = 200):
    """Grid version of the pair coverage test over whole vertex sets.

    A grid point counts as covered when it is strictly within ``delta1`` of
    every point of ``P`` or strictly within ``delta2`` of every point of
    ``Q``. Returns ``(covered, boundary_distance)`` where the second value is
    the smallest distance of a grid point to any of the spheres involved.
    """
    lo, hi = np.asarray(Dp.lo, float), np.asarray(Dp.hi, float)
    grid = _grid(lo, hi, resolution)
    in1 = np.ones(grid.shape[0], dtype=bool)
    in2 = np.ones(grid.shape[0], dtype=bool)
    near = math.inf
    for centers, r, acc in ((P, delta1, in1), (Q, delta2, in2)):
        for c in np.asarray(centers, float):
            d = np.sqrt(((grid - c) ** 2).sum(axis=1))
            acc &= d < r
            near = min(near, float(np.min(np.abs(d - r))))
    return bool(np.all(in1 | in2)), near
