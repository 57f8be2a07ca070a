"""Problem description consumed by the branch-and-bound engine.

An instance maximizes one variable subject to minimum distance
constraints, containment in balls with a constant or affine radius,
membership in thin spherical shells, linear inequalities and scaled copies
of variables (``x[var] == scale * x[source]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import BoxDomain, LinearCut
from ..single import MinDC
from ..symmetry import PointMatrixLayout

SPHERE_BAND = 1e-6


@dataclass(frozen=True)
class BallContainment:
    """``||x[vars] - center|| <= radius_const + radius_coef * x[radius_var]``."""

    vars: tuple
    center: tuple
    radius_const: float
    radius_coef: float = 0.0
    radius_var: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(int(v) for v in self.vars))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.vars) != len(self.center):
            raise ValueError("ball center and vars differ in length")
        if self.radius_var is None and self.radius_const < 0:
            raise ValueError("radius must be nonnegative")

    def radius_at(self, x) -> float:
        if self.radius_var is None:
            return self.radius_const
        return self.radius_const + self.radius_coef * float(x[self.radius_var])

    def radius_max(self, bounds: BoxDomain) -> float:
        if self.radius_var is None:
            return self.radius_const
        v = bounds.hi[self.radius_var] if self.radius_coef > 0 else bounds.lo[self.radius_var]
        return self.radius_const + self.radius_coef * float(v)


@dataclass(frozen=True)
class SphereMembership:
    """``| ||x[vars] - center|| - radius | <= band``."""

    vars: tuple
    center: tuple
    radius: float
    band: float = SPHERE_BAND

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(int(v) for v in self.vars))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.vars) != len(self.center):
            raise ValueError("sphere center and vars differ in length")
        if self.radius < 0 or self.band < 0:
            raise ValueError("radius and band must be nonnegative")


@dataclass(frozen=True)
class VariableLink:
    """``x[var] == scale * x[source]`` with ``scale > 0``."""

    var: int
    source: int
    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("link scale must be positive")


@dataclass
class Instance:
    num_vars: int
    bounds: BoxDomain
    objective_var: int
    mindcs: list = field(default_factory=list)
    balls: list = field(default_factory=list)
    spheres: list = field(default_factory=list)
    links: list = field(default_factory=list)
    static_cuts: list = field(default_factory=list)
    layout: PointMatrixLayout | None = None
    lex_rows: bool = False
    lex_cols: bool = False
    rotation_symmetric: bool = False
    name: str = "instance"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = self.num_vars
        if self.bounds.dim != n:
            raise ValueError("bounds length differs from num_vars")
        if np.any(self.bounds.lo > self.bounds.hi) or not self.bounds.is_finite():
            raise ValueError("bounds must be finite with lo <= hi")

        def check(idx, what):
            if not 0 <= int(idx) < n:
                raise ValueError(f"{what}: variable index {idx} out of range")

        check(self.objective_var, "objective_var")
        for c in self.mindcs:
            for v in c.variables:
                check(v, "mindc")
        for b in self.balls:
            for v in b.vars:
                check(v, "ball")
            if b.radius_var is not None:
                check(b.radius_var, "ball radius")
        for s in self.spheres:
            for v in s.vars:
                check(v, "sphere")
        for link in self.links:
            check(link.var, "link")
            check(link.source, "link")
        for cut in self.static_cuts:
            for v in cut.vars:
                check(v, "cut")
        if self.layout is not None:
            for v in self.layout.all_vars:
                check(v, "layout")

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        from ..instances import to_document
        return to_document(self) == to_document(other)

    @property
    def point_vars(self) -> list[int]:
        """Variables that describe positions (branching candidates)."""
        if self.layout is not None:
            return self.layout.all_vars
        derived = {self.objective_var} | {link.var for link in self.links}
        return [v for v in range(self.num_vars) if v not in derived]

    def sync_links(self, x) -> None:
        """Overwrite linked variables in ``x`` from their sources."""
        for _ in range(max(1, len(self.links))):
            for link in self.links:
                x[link.var] = link.scale * x[link.source]

    def violation(self, x) -> float:
        """Largest constraint violation of point ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        worst = max(0.0, float(np.max(self.bounds.lo - x)), float(np.max(x - self.bounds.hi)))
        for c in self.mindcs:
            delta = c.delta if c.delta_var is None else float(x[c.delta_var])
            diff = x[list(c.y)] - x[list(c.z)]
            worst = max(worst, delta - math.sqrt(float(diff @ diff)))
        for b in self.balls:
            diff = x[list(b.vars)] - np.asarray(b.center)
            worst = max(worst, math.sqrt(float(diff @ diff)) - b.radius_at(x))
        for s in self.spheres:
            diff = x[list(s.vars)] - np.asarray(s.center)
            worst = max(worst, abs(math.sqrt(float(diff @ diff)) - s.radius) - s.band)
        for link in self.links:
            worst = max(worst, abs(x[link.var] - link.scale * x[link.source]))
        for cut in self.static_cuts:
            worst = max(worst, cut.violation(x))
        return worst

    def is_feasible(self, x, tol: float = 1e-6) -> bool:
        return self.violation(x) <= tol


def mindc_arrays(mindcs) -> dict:
    """Constraint data grouped by dimension, as used by the kernels."""
    groups = {}
    for c in mindcs:
        groups.setdefault(c.dim, []).append(c)
    out = {}
    for d, cs in groups.items():
        Y = np.array([c.y for c in cs], dtype=np.int64).reshape(len(cs), d)
        Z = np.array([c.z for c in cs], dtype=np.int64).reshape(len(cs), d)
        dconst = np.array([c.delta for c in cs], dtype=float)
        dvar = np.array([-1 if c.delta_var is None else c.delta_var for c in cs], dtype=np.int64)
        out[d] = (Y, Z, dconst, dvar)
    return out


__all__ = [
    "BallContainment",
    "Instance",
    "LinearCut",
    "MinDC",
    "PointMatrixLayout",
    "SphereMembership",
    "VariableLink",
    "mindc_arrays",
]
