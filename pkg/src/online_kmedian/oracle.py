"""Brute-force ground truth for tiny instances and inequality checkers.

Nothing here touches the ledger or the local-search code: distances come
straight from :meth:`MetricSpace.distance` and every candidate median set is
evaluated from scratch.
"""
from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Sequence

from .errors import BicriteriaInapplicableError, OracleTooLargeError
from .ledger import OFFSET, Instance
from .metric import INF

MAX_SUBSETS = 10**6


def _size(instance: Instance) -> int:
    """Median count to enumerate: k, or all of F while |F| < k."""
    if not instance.facilities:
        raise ValueError("no candidate facilities")
    return min(instance.k, len(instance.facilities))


def _guard(n_facilities: int, k: int, limit: int = MAX_SUBSETS) -> None:
    if math.comb(n_facilities, k) > limit:
        raise OracleTooLargeError(
            f"C({n_facilities}, {k}) = {math.comb(n_facilities, k)} subsets exceeds {limit}"
        )


def _distances(instance: Instance) -> list[list[float]]:
    """d[f][c] for facility position f and client position c."""
    sp = instance.space
    return [[sp.distance(i, j) for j in instance.clients] for i in instance.facilities]


def _assignment(d, medians: Sequence[int], n: int, p: float) -> list[float]:
    return [min([min(d[f][c], p) for f in medians], default=p) for c in range(n)]


def kmedo_cost(instance: Instance, medians: Iterable[int], offset: float = OFFSET) -> float:
    """Offset plus the sum of d(j, S) after discarding the z farthest clients."""
    pos = {pid: i for i, pid in enumerate(instance.facilities)}
    d = _distances(instance)
    vals = _assignment(d, [pos[m] for m in medians], instance.n, INF)
    keep = sorted(vals)[: max(instance.n - instance.z, 0)]
    return offset + math.fsum(keep)


def brute_force_kmedo(instance: Instance, offset: float = OFFSET):
    """Exact k-median with z outliers by enumeration.

    Returns (opt, medians, outliers). Among equally distant clients at the
    outlier boundary the higher client ordinal is discarded first; among
    equally good median sets the lexicographically first wins.
    """
    F, n, z = instance.facilities, instance.n, instance.z
    k = _size(instance)
    _guard(len(F), k)
    d = _distances(instance)
    best = None
    for S in combinations(range(len(F)), k):
        vals = _assignment(d, S, n, INF)
        order = sorted(range(n), key=lambda c: (-vals[c], -c))
        out = order[: min(z, n)]
        dropped = set(out)
        cost = offset + math.fsum(vals[c] for c in range(n) if c not in dropped)
        if best is None or cost < best[0]:
            best = (cost, S, out)
    cost, S, out = best
    return (
        cost,
        tuple(F[f] for f in S),
        tuple(sorted(instance.clients[c] for c in out)),
    )


def penalty_cost(instance: Instance, medians: Iterable[int], p: float, offset: float = OFFSET) -> float:
    pos = {pid: i for i, pid in enumerate(instance.facilities)}
    d = _distances(instance)
    return offset + math.fsum(_assignment(d, [pos[m] for m in medians], instance.n, p))


def brute_force_penalty_kmedian(instance: Instance, p: float, offset: float = OFFSET):
    """Exact min over size-k S of cost_p(S). Returns (opt', medians)."""
    F, k = instance.facilities, _size(instance)
    _guard(len(F), k)
    d = _distances(instance)
    best = None
    for S in combinations(range(len(F)), k):
        cost = offset + math.fsum(_assignment(d, S, instance.n, p))
        if best is None or cost < best[0]:
            best = (cost, S)
    return best[0], tuple(F[f] for f in best[1])


def exhaustive_efficient_swaps(
    instance: Instance,
    medians: Iterable[int],
    p: float,
    ell: int,
    rho: float | None = None,
    epsilon: float | None = None,
    offset: float = OFFSET,
) -> list[tuple[tuple[int, ...], tuple[int, ...], float]]:
    """All rho-efficient swaps of size <= ell on ``medians``, by enumeration.

    Give either ``rho`` directly or ``epsilon``, in which case
    rho = epsilon * cost_p(S) / |S| as in the online algorithm.
    Each hit is (incoming, outgoing, delta).
    """
    F = instance.facilities
    pos = {pid: i for i, pid in enumerate(F)}
    S = sorted(pos[m] for m in medians)
    k = len(S)
    d = _distances(instance)
    n = instance.n
    old = _assignment(d, S, n, p)
    if rho is None:
        if epsilon is None:
            raise ValueError("give rho or epsilon")
        rho = epsilon * (offset + math.fsum(old)) / k
    closed = [f for f in range(len(F)) if f not in set(S)]
    neg_old = [-v for v in old]
    hits = []
    for s in range(1, min(ell, k, len(closed)) + 1):
        for out in combinations(S, s):
            kept = [f for f in S if f not in out]
            for inc in combinations(closed, s):
                new = _assignment(d, kept + list(inc), n, p)
                delta = math.fsum(new + neg_old)
                if delta < -s * rho:
                    hits.append((tuple(F[f] for f in inc), tuple(F[f] for f in out), delta))
    return hits


def check_locality_bound(
    instance: Instance,
    medians: Iterable[int],
    p: float,
    rho: float,
    ell: int,
    offset: float = OFFSET,
) -> bool:
    """Whether cost_p(S) <= offset + sum_j min{(3+2/ell) d_p(j,S*), (1+1/ell) p} + k rho
    holds against every size-k S* of F."""
    F, k = instance.facilities, _size(instance)
    _guard(len(F), k)
    d = _distances(instance)
    pos = {pid: i for i, pid in enumerate(F)}
    n = instance.n
    lhs = offset + math.fsum(_assignment(d, [pos[m] for m in medians], n, p))
    a, b = 3 + 2 / ell, (1 + 1 / ell) * p
    slack = k * rho
    for ref in combinations(range(len(F)), k):
        vals = _assignment(d, ref, n, p)
        rhs = offset + math.fsum(min(a * v, b) for v in vals) + slack
        if lhs > rhs:
            return False
    return True


def penalty_bound(opt: float, z: int, ell: int, gamma: float, setting: str = "static_F") -> float:
    if z < 1:
        raise BicriteriaInapplicableError("the penalty bound needs z >= 1")
    factor = 2.0 if setting == "F_equals_C" else 1.0
    return factor * 2 * (3 * ell + 2) * opt / (gamma * (ell + 1) * z)


def check_penalty_bound(
    p: float, opt: float, z: int, ell: int, gamma: float, setting: str = "static_F"
) -> bool:
    return p <= penalty_bound(opt, z, ell, gamma, setting)
