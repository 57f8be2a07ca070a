"""Hot inner loops of the propagation engine.

Every kernel exists twice: a loop version compiled with numba and a
vectorized numpy version. ``MINDC_NUMBA=0`` selects the numpy versions;
both compute the same Jacobi-style sweep (all proposals are derived from
the same snapshot of the bounds and merged by taking the tightest), so the
choice does not change search behavior beyond floating point noise.

Constraint data is passed as arrays: ``Y`` and ``Z`` are ``(m, d)`` index
arrays, ``dconst`` holds constant radii and ``dvar`` the index of the radius
variable (``-1`` for constants).
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

INFEASIBLE = -1


# --------------------------------------------------------------------------
# shared helpers

def _merge_loops(lo, hi, nlo, nhi, counted, eps):
    cnt = 0
    for v in range(lo.shape[0]):
        if nlo[v] > lo[v] + eps:
            lo[v] = nlo[v]
            if counted[v]:
                cnt += 1
        if nhi[v] < hi[v] - eps:
            hi[v] = nhi[v]
            if counted[v]:
                cnt += 1
        if lo[v] > hi[v]:
            if lo[v] - hi[v] > eps:
                return INFEASIBLE
            mid = 0.5 * (lo[v] + hi[v])
            lo[v] = mid
            hi[v] = mid
    return cnt


def _merge_numpy(lo, hi, nlo, nhi, counted, eps):
    up = nlo > lo + eps
    down = nhi < hi - eps
    lo[up] = nlo[up]
    hi[down] = nhi[down]
    cnt = int(np.count_nonzero(up & counted) + np.count_nonzero(down & counted))
    cross = lo > hi
    if np.any(cross):
        if np.any(lo[cross] - hi[cross] > eps):
            return INFEASIBLE
        mid = 0.5 * (lo[cross] + hi[cross])
        lo[cross] = mid
        hi[cross] = mid
    return cnt


# --------------------------------------------------------------------------
# per-axis separation rules (single constraint)

def _prop1_loops(lo, hi, Y, Z, dconst, dvar, positions, eps, counted):
    m = Y.shape[0]
    d = Y.shape[1]
    nlo = lo.copy()
    nhi = hi.copy()
    dist = np.empty(d)
    for k in range(m):
        if dvar[k] >= 0:
            dbar = lo[dvar[k]]
            if dbar < 0.0:
                dbar = 0.0
        else:
            dbar = dconst[k]
        tot = 0.0
        for i in range(d):
            a = abs(hi[Y[k, i]] - lo[Z[k, i]])
            b = abs(hi[Z[k, i]] - lo[Y[k, i]])
            dist[i] = a if a > b else b
            tot += dist[i] * dist[i]
        root = math.sqrt(tot)
        if root < dbar - eps:
            return INFEASIBLE
        if dvar[k] >= 0 and root < nhi[dvar[k]]:
            nhi[dvar[k]] = root
        if not positions or dbar <= 0.0:
            continue
        for j in range(d):
            s = dbar * dbar - (tot - dist[j] * dist[j])
            if s <= 0.0:
                continue
            delta = math.sqrt(s)
            yj = Y[k, j]
            zj = Z[k, j]
            ly = lo[yj]
            uy = hi[yj]
            lz = lo[zj]
            uz = hi[zj]
            if uy <= lz:
                nhi[yj] = min(nhi[yj], uz - delta)
                nlo[zj] = max(nlo[zj], ly + delta)
            elif uz <= ly:
                nhi[zj] = min(nhi[zj], uy - delta)
                nlo[yj] = max(nlo[yj], lz + delta)
            elif (lz <= ly and uy <= uz) or (ly <= lz and uz <= uy):
                pass
            elif lz < ly:
                if uz - ly < delta and uy - uz < delta:
                    nhi[zj] = min(nhi[zj], uy - delta)
                if ly - lz < delta and uz - ly < delta:
                    nlo[yj] = max(nlo[yj], lz + delta)
            else:
                if uy - lz < delta and uz - uy < delta:
                    nhi[yj] = min(nhi[yj], uz - delta)
                if lz - ly < delta and uy - lz < delta:
                    nlo[zj] = max(nlo[zj], ly + delta)
    return _merge_loops(lo, hi, nlo, nhi, counted, eps)


def _prop1_numpy(lo, hi, Y, Z, dconst, dvar, positions, eps, counted):
    if Y.shape[0] == 0:
        return 0
    nlo = lo.copy()
    nhi = hi.copy()
    ly, uy, lz, uz = lo[Y], hi[Y], lo[Z], hi[Z]
    has_var = dvar >= 0
    dbar = np.where(has_var, np.maximum(lo[np.where(has_var, dvar, 0)], 0.0), dconst)
    dist = np.maximum(np.abs(uy - lz), np.abs(uz - ly))
    sq = dist * dist
    tot = sq.sum(axis=1)
    root = np.sqrt(tot)
    if np.any(root < dbar - eps):
        return INFEASIBLE
    if np.any(has_var):
        np.minimum.at(nhi, dvar[has_var], root[has_var])
    if positions:
        s = (dbar * dbar)[:, None] - (tot[:, None] - sq)
        active = (s > 0.0) & (dbar > 0.0)[:, None]
        delta = np.sqrt(np.where(active, s, 0.0))
        c1 = active & (uy <= lz)
        c1s = active & ~c1 & (uz <= ly)
        nest = ((lz <= ly) & (uy <= uz)) | ((ly <= lz) & (uz <= uy))
        rest = active & ~c1 & ~c1s & ~nest
        c3 = rest & (lz < ly)
        c3s = rest & ~(lz < ly)
        new_uy = np.full(Y.shape, np.inf)
        new_ly = np.full(Y.shape, -np.inf)
        new_uz = np.full(Y.shape, np.inf)
        new_lz = np.full(Y.shape, -np.inf)
        new_uy = np.where(c1, uz - delta, new_uy)
        new_lz = np.where(c1, ly + delta, new_lz)
        new_uz = np.where(c1s, uy - delta, new_uz)
        new_ly = np.where(c1s, lz + delta, new_ly)
        m = c3 & (uz - ly < delta) & (uy - uz < delta)
        new_uz = np.where(m, uy - delta, new_uz)
        m = c3 & (ly - lz < delta) & (uz - ly < delta)
        new_ly = np.where(m, lz + delta, new_ly)
        m = c3s & (uy - lz < delta) & (uz - uy < delta)
        new_uy = np.where(m, uz - delta, new_uy)
        m = c3s & (lz - ly < delta) & (uy - lz < delta)
        new_lz = np.where(m, ly + delta, new_lz)
        np.minimum.at(nhi, Y.ravel(), new_uy.ravel())
        np.minimum.at(nhi, Z.ravel(), new_uz.ravel())
        np.maximum.at(nlo, Y.ravel(), new_ly.ravel())
        np.maximum.at(nlo, Z.ravel(), new_lz.ravel())
    return _merge_numpy(lo, hi, nlo, nhi, counted, eps)


# --------------------------------------------------------------------------
# facet-aligned slab removal (one orientation per call site, both handled here)
#
# For an edge parallel to axis j with other coordinates fixed to ``a``, the
# farthest vertex of D_z is chosen coordinate-wise, so the edge enters
# C(D_z, dbar) at  uz_j - sqrt(dbar^2 - R)  and leaves it at
# lz_j + sqrt(dbar^2 - R), with R the squared far distance over the other axes.

def _far_sq(a, lz, uz):
    x = a - lz
    y = a - uz
    x = x * x
    y = y * y
    return x if x > y else y


def _locatelli_loops(lo, hi, Y, Z, dconst, dvar, eps, eps_geom, counted):
    m = Y.shape[0]
    d = Y.shape[1]
    nlo = lo.copy()
    nhi = hi.copy()
    for k in range(m):
        if dvar[k] >= 0:
            dbar = lo[dvar[k]]
            if dbar < 0.0:
                dbar = 0.0
        else:
            dbar = dconst[k]
        if dbar <= 0.0:
            continue
        r2 = dbar * dbar - eps_geom
        for orient in range(2):
            if orient == 0:
                A = Y[k]
                B = Z[k]
            else:
                A = Z[k]
                B = Y[k]
            # whole box inside C -> infeasible
            allin = True
            for mask in range(1 << d):
                s = 0.0
                for i in range(d):
                    v = hi[A[i]] if (mask >> i) & 1 else lo[A[i]]
                    s += _far_sq(v, lo[B[i]], hi[B[i]])
                if not s < r2:
                    allin = False
                    break
            if allin:
                return INFEASIBLE
            for j in range(d):
                lj = lo[A[j]]
                uj = hi[A[j]]
                if lj == uj:
                    continue
                for side in range(2):
                    facet = uj if side == 1 else lj
                    ok = True
                    best = lj if side == 1 else uj
                    for mask in range(1 << (d - 1)):
                        s = 0.0
                        bit = 0
                        for i in range(d):
                            if i == j:
                                continue
                            v = hi[A[i]] if (mask >> bit) & 1 else lo[A[i]]
                            bit += 1
                            s += _far_sq(v, lo[B[i]], hi[B[i]])
                        if not s + _far_sq(facet, lo[B[j]], hi[B[j]]) < r2:
                            ok = False
                            break
                        root = math.sqrt(dbar * dbar - s)
                        if side == 1:
                            t = hi[B[j]] - root
                            if t > best:
                                best = t
                        else:
                            t = lo[B[j]] + root
                            if t < best:
                                best = t
                    if not ok:
                        continue
                    if side == 1:
                        if best < nhi[A[j]]:
                            nhi[A[j]] = best
                    else:
                        if best > nlo[A[j]]:
                            nlo[A[j]] = best
    return _merge_loops(lo, hi, nlo, nhi, counted, eps)


_pattern_cache = {}


def _patterns(n):
    pat = _pattern_cache.get(n)
    if pat is None:
        pat = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
        _pattern_cache[n] = pat
    return pat


def _locatelli_numpy(lo, hi, Y, Z, dconst, dvar, eps, eps_geom, counted):
    m, d = Y.shape
    if m == 0:
        return 0
    nlo = lo.copy()
    nhi = hi.copy()
    has_var = dvar >= 0
    dbar = np.where(has_var, np.maximum(lo[np.where(has_var, dvar, 0)], 0.0), dconst)
    live = dbar > 0.0
    r2 = dbar * dbar - eps_geom
    for A, B in ((Y, Z), (Z, Y)):
        la, ua, lb, ub = lo[A], hi[A], lo[B], hi[B]
        # (m, 2^d, d) vertex coordinates of D_y and far squared distances
        verts = np.where(_patterns(d)[None], ua[:, None, :], la[:, None, :])
        far = np.maximum((verts - lb[:, None, :]) ** 2, (verts - ub[:, None, :]) ** 2).sum(axis=2)
        if np.any(live & np.all(far < r2[:, None], axis=1)):
            return INFEASIBLE
        for j in range(d):
            others = [i for i in range(d) if i != j]
            pat = _patterns(d - 1)
            ao = np.where(pat[None], ua[:, None, others], la[:, None, others])
            s = np.maximum((ao - lb[:, None, others]) ** 2,
                           (ao - ub[:, None, others]) ** 2).sum(axis=2)
            root = np.sqrt(np.maximum(dbar[:, None] ** 2 - s, 0.0))
            movable = live & (la[:, j] < ua[:, j])
            for upper in (True, False):
                facet = ua[:, j] if upper else la[:, j]
                ffar = np.maximum((facet - lb[:, j]) ** 2, (facet - ub[:, j]) ** 2)
                ok = movable & np.all(s + ffar[:, None] < r2[:, None], axis=1)
                if not np.any(ok):
                    continue
                if upper:
                    best = np.maximum(la[:, j], (ub[:, j][:, None] - root).max(axis=1))
                    np.minimum.at(nhi, A[ok, j], best[ok])
                else:
                    best = np.minimum(ua[:, j], (lb[:, j][:, None] + root).min(axis=1))
                    np.maximum.at(nlo, A[ok, j], best[ok])
    return _merge_numpy(lo, hi, nlo, nhi, counted, eps)


# --------------------------------------------------------------------------
# pair coverage: is box Dp inside B(p, r1) | B(q, r2) for every p in P, q in Q

def _cover_loops(dlo, dhi, P, Q, r1, r2, tol):
    d = dlo.shape[0]
    x = np.empty(d)
    t1 = r1 * r1 + tol
    t2 = r2 * r2 + tol
    for a in range(P.shape[0]):
        for b in range(Q.shape[0]):
            for mask in range(1 << d):
                s1 = 0.0
                s2 = 0.0
                for i in range(d):
                    v = dhi[i] if (mask >> i) & 1 else dlo[i]
                    s1 += (v - P[a, i]) ** 2
                    s2 += (v - Q[b, i]) ** 2
                if not (s1 < t1 or s2 < t2):
                    return False
            for j in range(d):
                if dlo[j] == dhi[j]:
                    continue
                for mask in range(1 << (d - 1)):
                    bit = 0
                    rest = 0.0
                    for i in range(d):
                        if i == j:
                            continue
                        x[i] = dhi[i] if (mask >> bit) & 1 else dlo[i]
                        bit += 1
                        rest += (x[i] - P[a, i]) ** 2
                    disc = r1 * r1 - rest
                    if disc < -1e-9:
                        continue
                    root = math.sqrt(disc) if disc > 0.0 else 0.0
                    for sgn in range(2):
                        t = P[a, j] - root if sgn == 0 else P[a, j] + root
                        if t < dlo[j] - 1e-9 or t > dhi[j] + 1e-9:
                            continue
                        x[j] = min(max(t, dlo[j]), dhi[j])
                        s2 = 0.0
                        for i in range(d):
                            s2 += (x[i] - Q[b, i]) ** 2
                        if not s2 < t2:
                            return False
    return True


def _cover_numpy(dlo, dhi, P, Q, r1, r2, tol):
    d = dlo.shape[0]
    verts = np.where(_patterns(d), dhi[None, :], dlo[None, :])           # (V, d)
    s1 = ((verts[None] - P[:, None, :]) ** 2).sum(axis=2)                # (n1, V)
    s2 = ((verts[None] - Q[:, None, :]) ** 2).sum(axis=2)                # (n2, V)
    ok = (s1[:, None, :] < r1 * r1 + tol) | (s2[None, :, :] < r2 * r2 + tol)
    if not np.all(ok):
        return False
    for j in range(d):
        if dlo[j] == dhi[j]:
            continue
        others = [i for i in range(d) if i != j]
        anchors = np.where(_patterns(d - 1), dhi[others][None, :], dlo[others][None, :])  # (E, d-1)
        rest = ((anchors[None] - P[:, None, others]) ** 2).sum(axis=2)                 # (n1, E)
        disc = r1 * r1 - rest
        root = np.sqrt(np.maximum(disc, 0.0))
        for sgn in (-1.0, 1.0):
            t = P[:, j][:, None] + sgn * root                                           # (n1, E)
            hit = (disc >= -1e-9) & (t >= dlo[j] - 1e-9) & (t <= dhi[j] + 1e-9)
            if not np.any(hit):
                continue
            tc = np.clip(t, dlo[j], dhi[j])
            pts = np.empty(t.shape + (d,))
            pts[..., others] = anchors[None]
            pts[..., j] = tc
            dq = ((pts[:, :, None, :] - Q[None, None, :, :]) ** 2).sum(axis=3)          # (n1, E, n2)
            bad = hit[:, :, None] & ~(dq < r2 * r2 + tol)
            if np.any(bad):
                return False
    return True


# --------------------------------------------------------------------------
# repair: push apart pairs closer than their target distance

def _push_loops(x, Y, Z, target, fallback, disp):
    m = Y.shape[0]
    d = Y.shape[1]
    worst = 0.0
    disp[:] = 0.0
    diff = np.empty(d)
    for k in range(m):
        s = 0.0
        for i in range(d):
            diff[i] = x[Y[k, i]] - x[Z[k, i]]
            s += diff[i] * diff[i]
        dist = math.sqrt(s)
        deficit = target[k] - dist
        if deficit <= 0.0:
            continue
        if deficit > worst:
            worst = deficit
        for i in range(d):
            u = diff[i] / dist if dist > 1e-12 else fallback[k, i]
            disp[Y[k, i]] += 0.5 * deficit * u
            disp[Z[k, i]] -= 0.5 * deficit * u
    for v in range(x.shape[0]):
        x[v] += disp[v]
    return worst


def _push_numpy(x, Y, Z, target, fallback, disp):
    disp[:] = 0.0
    if Y.shape[0] == 0:
        return 0.0
    diff = x[Y] - x[Z]
    dist = np.sqrt((diff * diff).sum(axis=1))
    deficit = target - dist
    act = deficit > 0.0
    if not np.any(act):
        return 0.0
    safe = np.where(dist > 1e-12, dist, 1.0)
    u = np.where((dist > 1e-12)[:, None], diff / safe[:, None], fallback)
    step = np.where(act, 0.5 * deficit, 0.0)[:, None] * u
    np.add.at(disp, Y.ravel(), step.ravel())
    np.add.at(disp, Z.ravel(), -step.ravel())
    x += disp
    return float(deficit[act].max())


LOOP_KERNELS = {
    "prop1": _prop1_loops,
    "locatelli": _locatelli_loops,
    "cover": _cover_loops,
    "push": _push_loops,
}
NUMPY_KERNELS = {
    "prop1": _prop1_numpy,
    "locatelli": _locatelli_numpy,
    "cover": _cover_numpy,
    "push": _push_numpy,
}


if USE_NUMBA:
    _merge_loops = njit(cache=True)(_merge_loops)
    _far_sq = njit(cache=True, inline="always")(_far_sq)
    prop1_sweep = njit(cache=True)(_prop1_loops)
    locatelli_sweep = njit(cache=True)(_locatelli_loops)
    cover_check = njit(cache=True)(_cover_loops)
    push_apart = njit(cache=True)(_push_loops)
else:
    prop1_sweep = _prop1_numpy
    locatelli_sweep = _locatelli_numpy
    cover_check = _cover_numpy
    push_apart = _push_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
