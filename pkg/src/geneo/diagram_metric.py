"""Point pseudo-metric d* and the bottleneck distance between diagrams.

The bottleneck value is always attained at one of the pairwise d* costs or
half-persistences, so we binary-search that candidate set with a bipartite
matching feasibility test instead of a geometric tolerance search.  A
brute-force oracle over all bijections is provided for verification.
"""

from __future__ import annotations

import math

import numpy as np

from .core import PersistenceDiagram

try:  # pragma: no cover - exercised according to environment
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

INF = math.inf


class DegreeMismatchError(ValueError):
    pass


def d_star(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Cost of moving p to q, or both to the diagonal, whichever is smaller.

    Deaths may be +inf; the infinity conventions are: inf - inf = 0,
    finite - inf = -inf, |inf| = inf, min(inf, c) = c, max(inf, c) = inf.
    """
    x, y = p
    x2, y2 = q
    if x > y or x2 > y2:
        raise ValueError("malformed diagram point (birth > death)")
    if math.isinf(y) and math.isinf(y2):
        dy = 0.0
    else:
        dy = abs(y - y2)  # inf if exactly one death is infinite
    move = max(abs(x - x2), dy)
    to_diag = max((y - x) / 2.0, (y2 - x2) / 2.0)
    return min(move, to_diag)


def _essential_distance(b1: list[float], b2: list[float]) -> float:
    """Optimal max-|difference| matching of essential abscissas."""
    if len(b1) != len(b2):
        return INF
    if not b1:
        return 0.0
    a = np.sort(np.asarray(b1))
    b = np.sort(np.asarray(b2))
    return float(np.abs(a - b).max())


def _cost_arrays(p1: np.ndarray, p2: np.ndarray):
    """Pairwise d* matrix and half-persistences for finite points."""
    pers1 = (p1[:, 1] - p1[:, 0]) / 2.0
    pers2 = (p2[:, 1] - p2[:, 0]) / 2.0
    if len(p1) and len(p2):
        dx = np.abs(p1[:, 0, None] - p2[None, :, 0])
        dy = np.abs(p1[:, 1, None] - p2[None, :, 1])
        move = np.maximum(dx, dy)
        diag = np.maximum(pers1[:, None], pers2[None, :])
        D = np.minimum(move, diag)
    else:
        D = np.zeros((len(p1), len(p2)))
    return D, pers1, pers2


def _saturating_matching_exists(adj: list[list[int]], n_right: int) -> bool:
    """Kuhn's augmenting paths: can every left vertex be matched?"""
    match_right = [-1] * n_right

    def try_augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or try_augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    for u in range(len(adj)):
        if not try_augment(u, [False] * n_right):
            return False
    return True


def _feasible(D: np.ndarray, pers1: np.ndarray, pers2: np.ndarray, c: float) -> bool:
    """Is there a diagonal-augmented matching of max cost <= c?

    Points with half-persistence <= c may always retire to the diagonal, so
    feasibility reduces to matchings saturating the two required sides; by
    the Mendelsohn-Dulmage property these combine into one matching.
    """
    req1 = np.flatnonzero(pers1 > c)
    req2 = np.flatnonzero(pers2 > c)
    if len(req1):
        if len(pers2) == 0:
            return False
        adj = [list(np.flatnonzero(D[i] <= c)) for i in req1]
        if not _saturating_matching_exists(adj, len(pers2)):
            return False
    if len(req2):
        if len(pers1) == 0:
            return False
        adj = [list(np.flatnonzero(D[:, j] <= c)) for j in req2]
        if not _saturating_matching_exists(adj, len(pers1)):
            return False
    return True


if _HAVE_NUMBA:

    @njit(cache=True)
    def _saturates_nb(D, rows, n2, c):
        """Can every row in `rows` be matched to a distinct column with D<=c?"""
        match_right = np.full(n2, -1, dtype=np.int64)
        row_of = np.full(D.shape[0], -1, dtype=np.int64)
        for i in range(rows.shape[0]):
            row_of[rows[i]] = i
        # iterative DFS augmenting path per required row
        stack_u = np.empty(rows.shape[0] + 1, dtype=np.int64)
        stack_ci = np.empty(rows.shape[0] + 1, dtype=np.int64)
        path_v = np.empty(rows.shape[0] + 1, dtype=np.int64)
        for s in range(rows.shape[0]):
            seen = np.zeros(n2, dtype=np.bool_)
            depth = 0
            stack_u[0] = rows[s]
            stack_ci[0] = 0
            found = False
            while depth >= 0:
                u = stack_u[depth]
                ci = stack_ci[depth]
                advanced = False
                while ci < n2:
                    if not seen[ci] and D[u, ci] <= c:
                        seen[ci] = True
                        owner = match_right[ci]
                        path_v[depth] = ci
                        if owner == -1:
                            # augment along the path
                            for d in range(depth, -1, -1):
                                match_right[path_v[d]] = stack_u[d]
                            found = True
                            advanced = True
                            break
                        stack_ci[depth] = ci + 1
                        depth += 1
                        stack_u[depth] = owner
                        stack_ci[depth] = 0
                        advanced = True
                        break
                    ci += 1
                if found:
                    break
                if not advanced:
                    depth -= 1
            if not found:
                return False
        return True

    @njit(cache=True)
    def _finite_bottleneck_nb(p1, p2):
        n1 = p1.shape[0]
        n2 = p2.shape[0]
        pers1 = (p1[:, 1] - p1[:, 0]) / 2.0
        pers2 = (p2[:, 1] - p2[:, 0]) / 2.0
        D = np.empty((n1, n2))
        for i in range(n1):
            for j in range(n2):
                move = max(abs(p1[i, 0] - p2[j, 0]), abs(p1[i, 1] - p2[j, 1]))
                diag = max(pers1[i], pers2[j])
                D[i, j] = min(move, diag)
        upper = 0.0
        for i in range(n1):
            if pers1[i] > upper:
                upper = pers1[i]
        for j in range(n2):
            if pers2[j] > upper:
                upper = pers2[j]
        cand = np.concatenate((D.ravel(), pers1, pers2, np.zeros(1)))
        cand = np.unique(cand)
        cand = cand[cand <= upper + 1e-15]
        # lower bound: the best option of every point
        lb = 0.0
        for i in range(n1):
            best = pers1[i]
            for j in range(n2):
                if D[i, j] < best:
                    best = D[i, j]
            if best > lb:
                lb = best
        for j in range(n2):
            best = pers2[j]
            for i in range(n1):
                if D[i, j] < best:
                    best = D[i, j]
            if best > lb:
                lb = best
        lo = np.searchsorted(cand, lb)
        hi = cand.shape[0] - 1
        while lo < hi:
            mid = (lo + hi) // 2
            c = cand[mid]
            req1 = np.flatnonzero(pers1 > c)
            req2 = np.flatnonzero(pers2 > c)
            ok = True
            if req1.shape[0] > 0:
                ok = n2 > 0 and _saturates_nb(D, req1, n2, c)
            if ok and req2.shape[0] > 0:
                ok = n1 > 0 and _saturates_nb(D.T.copy(), req2, n1, c)
            if ok:
                hi = mid
            else:
                lo = mid + 1
        return cand[lo]


def _finite_bottleneck(p1: np.ndarray, p2: np.ndarray) -> float:
    if len(p1) == 0 and len(p2) == 0:
        return 0.0
    if _HAVE_NUMBA:
        return float(_finite_bottleneck_nb(p1, p2))
    D, pers1, pers2 = _cost_arrays(p1, p2)
    upper = 0.0
    if len(pers1):
        upper = max(upper, float(pers1.max()))
    if len(pers2):
        upper = max(upper, float(pers2.max()))
    candidates = np.unique(np.concatenate([D.ravel(), pers1, pers2, [0.0]]))
    candidates = candidates[candidates <= upper + 1e-15]
    lo, hi = 0, len(candidates) - 1
    # quick lower bound: every point must reach something at its best cost
    lb = 0.0
    if len(pers1):
        best1 = pers1 if not len(pers2) else np.minimum(pers1, D.min(axis=1))
        lb = max(lb, float(best1.max()))
    if len(pers2):
        best2 = pers2 if not len(pers1) else np.minimum(pers2, D.min(axis=0))
        lb = max(lb, float(best2.max()))
    lo = int(np.searchsorted(candidates, lb))
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(D, pers1, pers2, float(candidates[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Bottleneck (matching) distance between diagrams of equal degree."""
    if d1.degree != d2.degree:
        raise DegreeMismatchError(f"degree mismatch: {d1.degree} vs {d2.degree}")
    ess = _essential_distance(d1.essential_births(), d2.essential_births())
    if math.isinf(ess):
        return INF
    p1 = np.asarray(d1.finite_pairs(), dtype=np.float64).reshape(-1, 2)
    p2 = np.asarray(d2.finite_pairs(), dtype=np.float64).reshape(-1, 2)
    return max(ess, _finite_bottleneck(p1, p2))


# ---------------------------------------------------------------------------
# exhaustive oracle

_ORACLE_CAP = 8


def bottleneck_oracle(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exact bottleneck by enumerating every diagonal-augmented bijection.

    Limited to diagrams with at most 8 finite points each.
    """
    if d1.degree != d2.degree:
        raise DegreeMismatchError(f"degree mismatch: {d1.degree} vs {d2.degree}")
    p1 = d1.finite_pairs()
    p2 = d2.finite_pairs()
    if len(p1) > _ORACLE_CAP or len(p2) > _ORACLE_CAP:
        raise ValueError(f"oracle size cap exceeded ({_ORACLE_CAP} finite points)")

    ess = _oracle_essential(d1.essential_births(), d2.essential_births())
    if math.isinf(ess):
        return INF

    pers1 = [(d - b) / 2.0 for b, d in p1]
    pers2 = [(d - b) / 2.0 for b, d in p2]
    best = INF

    def recurse(i: int, used: set[int], cur: float):
        nonlocal best
        if cur >= best:
            return
        if i == len(p1):
            rest = cur
            for j in range(len(p2)):
                if j not in used:
                    rest = max(rest, pers2[j])
            best = min(best, rest)
            return
        # send point i to the diagonal
        recurse(i + 1, used, max(cur, pers1[i]))
        for j in range(len(p2)):
            if j not in used:
                used.add(j)
                recurse(i + 1, used, max(cur, d_star(p1[i], p2[j])))
                used.remove(j)

    recurse(0, set(), ess)
    return best if not math.isinf(best) else ess


def _oracle_essential(b1: list[float], b2: list[float]) -> float:
    from itertools import permutations

    if len(b1) != len(b2):
        return INF
    if not b1:
        return 0.0
    best = INF
    for perm in permutations(range(len(b2))):
        best = min(best, max(abs(b1[i] - b2[j]) for i, j in enumerate(perm)))
    return best
