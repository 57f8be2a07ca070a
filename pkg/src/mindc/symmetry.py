"""Symmetry handling for point-matrix models.

Rows of the point matrix ``X`` (one row per point) can be kept in
lexicographically decreasing order, and so can columns when the container
treats coordinates alike. Rotations in a coordinate plane ``(j, j')`` are
handled by cuts that push the first applicable row onto the nonnegative
``j`` axis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible
from .geometry import BoxDomain, LinearCut
from .single import EPS_BOUND, BoundChange, BoundKind

EPS_FIX = 1e-9
EPS_CUT = 1e-6


@dataclass(frozen=True)
class PointMatrixLayout:
    """Variable indices of an ``n x dim`` point matrix."""

    n: int
    dim: int
    vars: tuple

    def __post_init__(self):
        grid = np.asarray(self.vars, dtype=np.int64).reshape(self.n, self.dim)
        if len(set(grid.ravel().tolist())) != self.n * self.dim:
            raise ValueError("layout variables must be distinct")
        object.__setattr__(self, "vars", tuple(tuple(int(v) for v in row) for row in grid))

    @classmethod
    def contiguous(cls, n: int, dim: int, start: int = 0) -> "PointMatrixLayout":
        return cls(n, dim, tuple(tuple(start + i * dim + j for j in range(dim)) for i in range(n)))

    def var_of(self, i: int, j: int) -> int:
        return self.vars[i][j]

    def row(self, i: int) -> tuple:
        return self.vars[i]

    def column(self, j: int) -> tuple:
        return tuple(self.vars[i][j] for i in range(self.n))

    @property
    def all_vars(self) -> list[int]:
        return [v for row in self.vars for v in row]


@dataclass(frozen=True)
class RotationCutSpec:
    row: int
    axes: tuple
    signs: tuple
    alpha: float


def _lex_pair(lo, hi, first, second, eps):
    """Tighten ``lo``/``hi`` in place so that vector ``first >=_lex second`` stays possible."""
    for a, b in zip(first, second):
        if hi[a] < lo[b] - eps:
            raise Infeasible("lexicographic order violated")
        if lo[b] > lo[a]:
            lo[a] = lo[b]
        if hi[a] < hi[b]:
            hi[b] = hi[a]
        fixed_equal = (hi[a] - lo[a] <= EPS_FIX and hi[b] - lo[b] <= EPS_FIX
                       and abs(lo[a] - lo[b]) <= EPS_FIX)
        if not fixed_equal:
            return


def _diff(bounds: BoxDomain, lo, hi, eps) -> list[BoundChange]:
    out = []
    for v in np.flatnonzero(lo > bounds.lo + eps):
        out.append(BoundChange(int(v), BoundKind.RAISE_LOWER, float(lo[v])))
    for v in np.flatnonzero(hi < bounds.hi - eps):
        out.append(BoundChange(int(v), BoundKind.LOWER_UPPER, float(hi[v])))
    return out


def _lex_chain(vectors, bounds: BoxDomain, eps: float) -> list[BoundChange]:
    lo = bounds.lo.copy()
    hi = bounds.hi.copy()
    for first, second in zip(vectors, vectors[1:]):
        _lex_pair(lo, hi, first, second, eps)
    if np.any(lo > hi + eps):
        raise Infeasible("lexicographic order violated")
    return _diff(bounds, lo, hi, eps)


def lex_rows_propagate(layout: PointMatrixLayout, bounds: BoxDomain,
                       eps: float = EPS_BOUND) -> list[BoundChange]:
    """Bound changes enforcing ``X^i >=_lex X^{i+1}`` for consecutive rows."""
    return _lex_chain([layout.row(i) for i in range(layout.n)], bounds, eps)


def lex_cols_propagate(layout: PointMatrixLayout, bounds: BoxDomain,
                       eps: float = EPS_BOUND) -> list[BoundChange]:
    """Column version of :func:`lex_rows_propagate`."""
    return _lex_chain([layout.column(j) for j in range(layout.dim)], bounds, eps)


def _wrap(angle: float) -> float:
    t = angle % (2.0 * math.pi)
    # a tiny negative angle rounds up to exactly 2 pi
    return 0.0 if t >= 2.0 * math.pi else t


def alpha_star(a: float, b: float) -> tuple[float, float]:
    """Minimizer of ``(1 - cos t) * a + sin t * b`` over ``[0, 2 pi)`` and the minimum."""
    rho = math.hypot(a, b)
    if rho == 0.0:
        raise ValueError("degenerate point")
    alpha = _wrap(math.atan2(-b / rho, a / rho))
    # a - rho, written to avoid cancellation when a > 0
    min_value = -(b * b) / (a + rho) if a > 0 else a - rho
    return alpha, min_value


def applicable_rows(layout: PointMatrixLayout, bounds: BoxDomain, axes) -> list[int]:
    """Rows whose predecessors are all fixed to zero on both ``axes`` (row 0 always)."""
    j, jp = axes
    rows = [0]
    for i in range(1, layout.n):
        prev = (layout.var_of(i - 1, j), layout.var_of(i - 1, jp))
        if all(-EPS_FIX <= bounds.lo[v] and bounds.hi[v] <= EPS_FIX for v in prev):
            rows.append(i)
        else:
            break
    return rows


def rotation_cut(spec: RotationCutSpec, layout: PointMatrixLayout) -> LinearCut:
    """``(1 - s_j cos a) x_ij + s_j' sin a x_ij' >= 0`` for the given spec."""
    j, jp = spec.axes
    sj, sjp = spec.signs
    coefs = (1.0 - sj * math.cos(spec.alpha), sjp * math.sin(spec.alpha))
    return LinearCut((layout.var_of(spec.row, j), layout.var_of(spec.row, jp)), coefs, 0.0,
                     local=spec.row > 0, origin="rotation")


def _best_spec(row, axes, a, b):
    # every sign pattern reaches the same minimum a - |(a, b)| with the same
    # coefficients, so the tie rule keeps the lexicographically smallest signs
    _, val = alpha_star(a, b)
    best = None
    for sj, sjp in itertools.product((-1, 1), repeat=2):
        alpha = _wrap(math.atan2(-sjp * b, sj * a))
        f = (1.0 - sj * math.cos(alpha)) * a + sjp * math.sin(alpha) * b
        if best is None or f < best[1] - 1e-12:
            best = (RotationCutSpec(row, axes, (sj, sjp), alpha), f)
    return best[0], val


def separate_rotation_cuts(layout: PointMatrixLayout, point, bounds: BoxDomain,
                           eps_cut: float = EPS_CUT, return_specs: bool = False):
    """Rotation cuts violated by more than ``eps_cut`` at ``point``.

    One cut per applicable ``(row, j, j')``: the most violated of the four
    sign patterns, ties going to the lexicographically smallest signs.
    """
    x = np.asarray(point, dtype=float)
    cuts, specs = [], []
    for axes in itertools.combinations(range(layout.dim), 2):
        for i in applicable_rows(layout, bounds, axes):
            a = float(x[layout.var_of(i, axes[0])])
            b = float(x[layout.var_of(i, axes[1])])
            if a == 0.0 and b == 0.0:
                continue
            spec, val = _best_spec(i, axes, a, b)
            if val < -eps_cut:
                specs.append(spec)
                cuts.append(rotation_cut(spec, layout))
    return (cuts, specs) if return_specs else cuts
