"""Box combinatorics, balls, sphere intersections and hyperplanes.

All functions are pure. Points are 1-D float arrays; boxes are
:class:`BoxDomain` instances holding ``lo``/``hi`` arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

EPS_GEOM = 1e-9


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class BoxDomain:
    """Axis-aligned box ``[lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.array(self.lo, dtype=float).reshape(-1)
        self.hi = np.array(self.hi, dtype=float).reshape(-1)
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must have the same length")

    @classmethod
    def from_intervals(cls, intervals: Sequence[Sequence[float]]) -> "BoxDomain":
        arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def point(cls, p) -> "BoxDomain":
        p = np.asarray(p, dtype=float)
        return cls(p.copy(), p.copy())

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def intervals(self) -> list[Interval]:
        return [Interval(float(a), float(b)) for a, b in zip(self.lo, self.hi)]

    def __getitem__(self, i) -> Interval:
        return Interval(float(self.lo[i]), float(self.hi[i]))

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def copy(self) -> "BoxDomain":
        return BoxDomain(self.lo.copy(), self.hi.copy())

    def sub(self, idx) -> "BoxDomain":
        idx = np.asarray(idx, dtype=np.int64)
        return BoxDomain(self.lo[idx], self.hi[idx])

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(np.maximum(self.widths, 0.0)))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def is_empty(self, tol: float = 0.0) -> bool:
        return bool(np.any(self.lo > self.hi + tol))

    def is_singleton(self) -> bool:
        return bool(np.all(self.lo == self.hi))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def is_subset(self, other: "BoxDomain", tol: float = 0.0) -> bool:
        return bool(np.all(self.lo >= other.lo - tol) and np.all(self.hi <= other.hi + tol))


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball; boundary points are not members."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, x, eps: float = EPS_GEOM) -> bool:
        d = np.asarray(x, dtype=float) - self.center
        return bool(d @ d < self.radius * self.radius - eps)


@dataclass(frozen=True)
class BoxEdge:
    """Edge of a box: ``anchor`` with coordinate ``free_axis`` ranging over ``span``."""

    anchor: np.ndarray
    free_axis: int
    span: Interval

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array(self.anchor, dtype=float)
        b = a.copy()
        a[self.free_axis] = self.span.lo
        b[self.free_axis] = self.span.hi
        return a, b

    def at(self, t: float) -> np.ndarray:
        p = np.array(self.anchor, dtype=float)
        p[self.free_axis] = t
        return p


@dataclass
class LinearCut:
    """Sparse inequality ``sum(coefs[k] * x[vars[k]]) >= rhs``."""

    vars: tuple
    coefs: np.ndarray
    rhs: float
    local: bool = False
    origin: str = field(default="", compare=False)

    def __post_init__(self):
        self.vars = tuple(int(v) for v in self.vars)
        self.coefs = np.asarray(self.coefs, dtype=float).reshape(-1)
        self.rhs = float(self.rhs)
        if len(self.vars) != self.coefs.shape[0]:
            raise ValueError("vars and coefs differ in length")

    def activity(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.coefs @ x[list(self.vars)])

    def violation(self, x) -> float:
        """Positive when ``x`` violates the cut."""
        return self.rhs - self.activity(x)


def _check_finite(box: BoxDomain):
    if not box.is_finite():
        raise ValueError("unbounded domain")


def box_vertices(box: BoxDomain) -> list[np.ndarray]:
    """Corners of ``box``; degenerate axes contribute a single value."""
    _check_finite(box)
    choices = [(lo,) if lo == hi else (lo, hi) for lo, hi in zip(box.lo, box.hi)]
    return [np.array(c, dtype=float) for c in itertools.product(*choices)]


def box_edges(box: BoxDomain) -> list[BoxEdge]:
    """One-dimensional faces of ``box``, anchored at the lower end of the free axis."""
    _check_finite(box)
    edges = []
    for axis in range(box.dim):
        lo, hi = box.lo[axis], box.hi[axis]
        if lo == hi:
            continue
        choices = []
        for i in range(box.dim):
            if i == axis or box.lo[i] == box.hi[i]:
                choices.append((box.lo[i],))
            else:
                choices.append((box.lo[i], box.hi[i]))
        for combo in itertools.product(*choices):
            edges.append(BoxEdge(np.array(combo, dtype=float), axis, Interval(float(lo), float(hi))))
    return edges


def segment_sphere_intersection(edge: BoxEdge, ball: Ball, eps: float = EPS_GEOM) -> list[np.ndarray]:
    """Points of the closed edge at distance exactly ``ball.radius`` from the center."""
    f = edge.free_axis
    diff = np.asarray(edge.anchor, dtype=float) - ball.center
    rest = float(diff @ diff - diff[f] * diff[f])
    disc = ball.radius * ball.radius - rest
    if disc < -eps:
        return []
    c = float(ball.center[f])
    if disc <= eps:
        roots = [c]
    else:
        s = math.sqrt(disc)
        roots = [c - s, c + s]
    lo, hi = edge.span
    out = []
    for t in roots:
        if lo - eps <= t <= hi + eps:
            out.append(edge.at(min(max(t, lo), hi)))
    return out


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class TwoPoints:
    p: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class Circle:
    center: np.ndarray
    radius: float
    axis_normal: np.ndarray

    def plane_basis(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.axis_normal
        k = int(np.argmin(np.abs(n)))
        helper = np.zeros(3)
        helper[k] = 1.0
        e1 = np.cross(n, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        return e1, e2


@dataclass(frozen=True)
class Degenerate:
    pass


def sphere_sphere_intersection(b1: Ball, b2: Ball, dim: int, eps: float = EPS_GEOM):
    """Intersection of the boundaries of two balls in 2 or 3 dimensions.

    Returns ``Empty()``, ``TwoPoints`` (dim 2, points sorted lexicographically),
    ``Circle`` (dim 3) or ``Degenerate()`` for tangency and coincident spheres.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    c1 = np.asarray(b1.center, dtype=float)
    c2 = np.asarray(b2.center, dtype=float)
    r1, r2 = float(b1.radius), float(b2.radius)
    v = c2 - c1
    d = float(np.linalg.norm(v))
    if d <= eps:
        return Degenerate() if abs(r1 - r2) <= eps else Empty()
    if d > r1 + r2 + eps or d < abs(r1 - r2) - eps:
        return Empty()
    u = v / d
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r1 * r1 - a * a
    if h2 <= eps:
        return Degenerate()
    h = math.sqrt(h2)
    m = c1 + a * u
    if dim == 3:
        return Circle(m, h, u)
    perp = np.array([-u[1], u[0]])
    p, q = m + h * perp, m - h * perp
    if tuple(q) < tuple(p):
        p, q = q, p
    return TwoPoints(p, q)


def circle_plane_points(circle: Circle, axis: int, value: float, eps: float = EPS_GEOM) -> list[np.ndarray]:
    """Points of a 3-D circle lying on the plane ``x[axis] == value``."""
    e1, e2 = circle.plane_basis()
    a = circle.radius * e1[axis]
    b = circle.radius * e2[axis]
    rhs = value - circle.center[axis]
    amp = math.hypot(a, b)
    if amp <= eps or abs(rhs) > amp + eps:
        return []
    phi = math.atan2(b, a)
    ratio = max(-1.0, min(1.0, rhs / amp))
    spread = math.acos(ratio)
    thetas = [phi] if spread <= eps else [phi - spread, phi + spread]
    pts = []
    for th in thetas:
        p = circle.center + circle.radius * (math.cos(th) * e1 + math.sin(th) * e2)
        p[axis] = value
        pts.append(p)
    return pts


def hyperplane_through_points(points, eps: float = EPS_GEOM) -> LinearCut | None:
    """Unit-normal hyperplane ``a.x = b`` through ``dim`` points, or ``None``.

    The returned cut refers to local coordinates ``0..dim-1``; its sign is
    normalized so the first nonzero coefficient is positive.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] != pts.shape[1]:
        raise ValueError("need exactly dim points of dimension dim")
    dim = pts.shape[1]
    if dim == 1:
        a = np.ones(1)
    else:
        diffs = pts[1:] - pts[0]
        _, s, vt = np.linalg.svd(diffs)
        scale = max(1.0, float(np.max(np.abs(pts))))
        if s.shape[0] < dim - 1 or s[-1] <= eps * scale:
            return None
        a = vt[-1]
    a = a / np.linalg.norm(a)
    nz = np.flatnonzero(np.abs(a) > eps)
    if a[nz[0]] < 0:
        a = -a
    a[np.abs(a) <= 1e-15] = 0.0
    b = float(np.mean(pts @ a))
    return LinearCut(tuple(range(dim)), a, b)
