"""Best-first spatial branch-and-bound (maximization of one variable)."""

from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..geometry import BoxDomain
from .model import Instance, mindc_arrays
from .propagate import PropagationContext, PropStatus, propagate_node

LEAF_WIDTH = 1e-6
REPAIR_SWEEPS = 200
HEURISTIC_EVERY = 10
ROOT_STARTS = 6
ROOT_ASCENT_STEPS = 12

SETTING_NAMES = ("default", "heur_0_pair_0", "heur_1_pair_0", "heur_0_pair_1", "heur_1_pair_1")


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    GAP_REACHED = "GapReached"
    TIME_LIMIT = "TimeLimit"
    NODE_LIMIT = "NodeLimit"
    INFEASIBLE = "Infeasible"

    def __str__(self):
        return self.value


@dataclass
class Settings:
    """Solver switches.

    ``heur=None`` is the baseline without minimum distance reductions (only
    the distance upper bound is propagated); ``heur=0`` adds facet slab
    removal to the per-axis rules, ``heur=1`` uses the per-axis rules alone.
    """

    heur: int | None = 1
    pair: int = 0
    rotsym: bool = False
    cutfreq: int = 0
    lex_rows: bool = True
    lex_cols: bool = True
    gap: float = 0.005
    time_limit: float = 7200.0
    node_limit: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.heur not in (None, 0, 1):
            raise ValueError("heur must be None, 0 or 1")
        if self.pair not in (0, 1):
            raise ValueError("pair must be 0 or 1")
        if self.cutfreq not in (0, 1, 10):
            raise ValueError("cutfreq must be 0, 1 or 10")
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        if self.heur is None and self.pair:
            raise ValueError("pair reductions need heur 0 or 1")

    @property
    def name(self) -> str:
        if self.heur is None:
            return "default"
        return f"heur_{self.heur}_pair_{self.pair}"

    @classmethod
    def from_name(cls, name: str, **kwargs) -> "Settings":
        if name == "default":
            return cls(heur=None, pair=0, **kwargs)
        parts = name.split("_")
        if len(parts) != 4 or parts[0] != "heur" or parts[2] != "pair":
            raise ValueError(f"unknown setting name {name!r}")
        return cls(heur=int(parts[1]), pair=int(parts[3]), **kwargs)


@dataclass
class SearchNode:
    bounds: BoxDomain
    depth: int = 0
    changed_vars: set = field(default_factory=set)
    local_upper: float = math.inf
    local_cuts: list = field(default_factory=list)
    cutoff_seen: float = -math.inf


@dataclass
class SolveResult:
    status: Status
    incumbent_value: float | None
    incumbent_point: np.ndarray | None
    dual_bound: float
    gap: float
    nodes: int
    time: float
    cuts_added: int
    reductions_by_algorithm: dict
    instance_name: str = ""
    setting_name: str = ""


def relative_gap(dual: float, primal: float | None) -> float:
    if primal is None or not math.isfinite(dual):
        return math.inf
    return max(0.0, (dual - primal) / max(abs(primal), 1e-9))


# --------------------------------------------------------------------------
# branching

def branch(node: SearchNode, instance: Instance, root: BoxDomain):
    """Split the widest point variable (relative to the root) at its midpoint.

    Returns ``None`` when every candidate is narrower than ``LEAF_WIDTH``.
    """
    cand = np.asarray(instance.point_vars, dtype=np.int64)
    widths = node.bounds.hi[cand] - node.bounds.lo[cand]
    if widths.max(initial=0.0) < LEAF_WIDTH:
        return None
    root_w = root.hi[cand] - root.lo[cand]
    rel = np.where(root_w > 0, widths / np.where(root_w > 0, root_w, 1.0), 0.0)
    rel = np.where(widths >= LEAF_WIDTH, rel, -1.0)
    var = int(cand[int(np.argmax(rel))])
    mid = 0.5 * (node.bounds.lo[var] + node.bounds.hi[var])
    left = node.bounds.copy()
    right = node.bounds.copy()
    left.hi[var] = mid
    right.lo[var] = mid
    kids = []
    for b in (left, right):
        kids.append(SearchNode(b, node.depth + 1, {var}, node.local_upper, list(node.local_cuts)))
    return tuple(kids)


# --------------------------------------------------------------------------
# primal heuristic

class Repairer:
    """Push-and-project repair of a point configuration for a target objective."""

    def __init__(self, instance: Instance, seed: int):
        self.inst = instance
        self.arrays = mindc_arrays(instance.mindcs)
        self.rng = np.random.default_rng(seed)
        self.point_mask = np.zeros(instance.num_vars, dtype=bool)
        self.point_mask[instance.point_vars] = True
        balls = instance.balls
        if balls:
            d = len(balls[0].vars)
            same = all(len(b.vars) == d for b in balls)
        self._ball_arrays = None
        if balls and same:
            self._ball_arrays = (
                np.array([b.vars for b in balls], dtype=np.int64),
                np.array([b.center for b in balls], dtype=float),
                np.array([b.radius_const for b in balls], dtype=float),
                np.array([b.radius_coef for b in balls], dtype=float),
                np.array([-1 if b.radius_var is None else b.radius_var for b in balls], dtype=np.int64),
            )
        self._cut_moves = []
        for cut in instance.static_cuts:
            movable = np.array([self.point_mask[v] for v in cut.vars])
            a = np.where(movable, cut.coefs, 0.0)
            norm = float(a @ a)
            if norm > 0:
                self._cut_moves.append((cut, a / norm))

    def _project(self, x):
        inst = self.inst
        if self._ball_arrays is not None:
            V, C, const, coef, rvar = self._ball_arrays
            R = const + coef * np.where(rvar >= 0, x[np.maximum(rvar, 0)], 0.0)
            R = np.maximum(R, 0.0)
            diff = x[V] - C
            dist = np.sqrt((diff * diff).sum(axis=1))
            over = dist > R
            if np.any(over):
                scale = np.where(over, R / np.where(dist > 0, dist, 1.0), 1.0)
                x[V] = C + diff * scale[:, None]
        for s in inst.spheres:
            idx = list(s.vars)
            c = np.asarray(s.center)
            diff = x[idx] - c
            dist = math.sqrt(float(diff @ diff))
            if dist < 1e-12:
                diff = self.rng.normal(size=len(idx))
                dist = float(np.linalg.norm(diff))
            x[idx] = c + diff * (s.radius / dist)
        for cut, step in self._cut_moves:
            v = cut.violation(x)
            if v > 0:
                x[list(cut.vars)] += v * step
        pm = self.point_mask
        np.clip(x, inst.bounds.lo, inst.bounds.hi, out=x, where=pm)

    def repair(self, x, target: float, sweeps: int = REPAIR_SWEEPS) -> np.ndarray:
        inst = self.inst
        x = np.array(x, dtype=float)
        x[inst.objective_var] = target
        inst.sync_links(x)
        disp = np.zeros_like(x)
        fallback = {d: self.rng.normal(size=(Y.shape[0], d)) for d, (Y, *_rest) in self.arrays.items()}
        for d in fallback:
            fallback[d] /= np.linalg.norm(fallback[d], axis=1, keepdims=True)
        for _ in range(sweeps):
            worst = 0.0
            for d, (Y, Z, dconst, dvar) in self.arrays.items():
                tgt = np.where(dvar >= 0, x[np.maximum(dvar, 0)], dconst)
                worst = max(worst, kernels.push_apart(x, Y, Z, tgt, fallback[d], disp))
            self._project(x)
            if worst <= 1e-10:
                break
        return x

    def best_objective(self, x) -> float | None:
        """Largest objective value feasible for the positions in ``x`` (bisection)."""
        inst = self.inst
        obj = inst.objective_var
        y = np.array(x, dtype=float)

        def ok(r):
            y[obj] = r
            inst.sync_links(y)
            return inst.violation(y) <= 1e-9

        lo, hi = float(inst.bounds.lo[obj]), float(inst.bounds.hi[obj])
        if not ok(lo):
            return None
        if ok(hi):
            return hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    def attempt(self, start, target):
        x = self.repair(start, target)
        r = self.best_objective(x)
        if r is None:
            return None, None
        x[self.inst.objective_var] = r
        self.inst.sync_links(x)
        return r, x


def incumbent_try(node: SearchNode, instance: Instance, repairer: Repairer | None = None,
                  targets=None):
    """Repair the box midpoint toward each target value; best ``(value, point)`` or ``(None, None)``."""
    repairer = repairer or Repairer(instance, 0)
    start = node.bounds.midpoint
    if targets is None:
        targets = [node.local_upper if math.isfinite(node.local_upper)
                   else float(node.bounds.hi[instance.objective_var])]
    best = (None, None)
    for t in targets:
        r, x = repairer.attempt(start, t)
        if r is not None and (best[0] is None or r > best[0]):
            best = (r, x)
    return best


def _root_heuristic(instance: Instance, repairer: Repairer, root: BoxDomain):
    """Multi-start ascent: repeatedly repair toward a slightly larger objective."""
    rng = np.random.default_rng(repairer.rng.integers(2**32))
    best = (None, None)
    pm = repairer.point_mask
    for s in range(ROOT_STARTS):
        x = root.midpoint
        if s > 0:
            x[pm] = rng.uniform(root.lo[pm], root.hi[pm])
        r, x = repairer.attempt(x, float(root.hi[instance.objective_var]))
        if r is None:
            continue
        for _ in range(ROOT_ASCENT_STEPS):
            step = max(0.02 * abs(r), 1e-3)
            r2, x2 = repairer.attempt(x, r + step)
            if r2 is None or r2 <= r + 1e-9:
                break
            r, x = r2, x2
        if best[0] is None or r > best[0]:
            best = (r, x)
    return best


# --------------------------------------------------------------------------
# main loop

def solve(instance: Instance, settings: Settings | None = None, on_prune=None) -> SolveResult:
    """Maximize ``instance.objective_var``.

    ``on_prune(bounds, bound)``, when given, is called for every discarded
    box (as it was before propagation) and an upper bound on the objective
    of every feasible point in it.
    """
    settings = settings or Settings()
    t0 = time.perf_counter()
    ctx = PropagationContext(instance, settings)
    repairer = Repairer(instance, settings.seed)
    obj = instance.objective_var
    root_box = instance.bounds.copy()

    inc_val, inc_x = None, None
    pruned_bound = -math.inf
    dual = math.inf
    nodes = 0
    counter = 0
    heap = []

    def set_cutoff():
        if inc_val is not None:
            ctx.cutoff = inc_val + settings.gap * max(abs(inc_val), 1e-9) * (1.0 - 1e-6)

    def offer(val, x):
        nonlocal inc_val, inc_x
        if val is not None and (inc_val is None or val > inc_val + 1e-12):
            inc_val, inc_x = val, x
            set_cutoff()

    def prune(box, bound):
        nonlocal pruned_bound
        pruned_bound = max(pruned_bound, bound)
        if on_prune is not None:
            on_prune(box, bound)

    def evaluate(node) -> bool:
        """Propagate; returns False (after recording the prune) if the node is gone."""
        cutoff = ctx.cutoff
        node.cutoff_seen = cutoff
        before = node.bounds.copy() if on_prune is not None else None
        status = propagate_node(node, instance, settings, ctx)
        if status is PropStatus.INFEASIBLE:
            prune(before, cutoff)
            return False
        return True

    def push(node):
        nonlocal counter
        heapq.heappush(heap, (-node.local_upper, counter, node))
        counter += 1

    def current_dual():
        live = -heap[0][0] if heap else -math.inf
        return max(live, pruned_bound, inc_val if inc_val is not None else -math.inf)

    root = SearchNode(root_box.copy(), 0, set(range(instance.num_vars)),
                      float(root_box.hi[obj]))
    offer(*_root_heuristic(instance, repairer, root_box))
    status = None
    if evaluate(root):
        push(root)
    dual = min(dual, current_dual())

    while heap:
        if inc_val is not None and relative_gap(dual, inc_val) <= settings.gap:
            break
        if time.perf_counter() - t0 > settings.time_limit:
            status = Status.TIME_LIMIT
            break
        if settings.node_limit is not None and nodes >= settings.node_limit:
            status = Status.NODE_LIMIT
            break
        _, _, node = heapq.heappop(heap)
        if ctx.cutoff > node.cutoff_seen:
            if node.local_upper < ctx.cutoff:
                prune(node.bounds, node.local_upper)
                dual = min(dual, current_dual())
                continue
            if not evaluate(node):
                dual = min(dual, current_dual())
                continue
        nodes += 1
        kids = branch(node, instance, root_box)
        if kids is None or nodes % HEURISTIC_EVERY == 0:
            targets = [node.local_upper]
            if inc_val is not None:
                targets.append(0.5 * (inc_val + node.local_upper))
            offer(*incumbent_try(node, instance, repairer, targets))
        if kids is None:
            prune(node.bounds, node.local_upper)
        else:
            for kid in kids:
                if evaluate(kid):
                    push(kid)
        dual = min(dual, current_dual())

    elapsed = time.perf_counter() - t0
    dual = min(dual, current_dual())
    if status is None:
        if inc_val is None:
            status = Status.INFEASIBLE if pruned_bound == -math.inf else Status.NODE_LIMIT
            if status is Status.INFEASIBLE:
                dual = -math.inf
        elif dual <= inc_val + 1e-9 * max(1.0, abs(inc_val)):
            status = Status.OPTIMAL
        else:
            status = Status.GAP_REACHED
    counts = {k: int(ctx.counters.get(k, 0)) for k in ("prop1", "locatelli", "pair_geo", "pair_bisect")}
    return SolveResult(
        status=status,
        incumbent_value=inc_val,
        incumbent_point=inc_x,
        dual_bound=dual,
        gap=relative_gap(dual, inc_val),
        nodes=nodes,
        time=elapsed,
        cuts_added=ctx.cuts_added,
        reductions_by_algorithm=counts,
        instance_name=instance.name,
        setting_name=settings.name,
    )
