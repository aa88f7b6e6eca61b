"""Swap enumeration, efficient-swap search and the offline solvers.

Candidate deltas are first screened with vectorised numpy sums, then every
candidate that could pass the efficiency test is re-evaluated exactly
(``math.fsum`` over per-client changes) before it is accepted. Screening
errors therefore never change which swap is chosen.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from itertools import combinations, islice
from typing import Callable, Iterator

import numpy as np

from .errors import BicriteriaInapplicableError, InfeasibleError, InvalidSwapError
from .ledger import AssignmentLedger, Instance, RecourseLog, Solution, build_ledger
from .metric import INF

log = logging.getLogger(__name__)

FIRST_IMPROVEMENT = "first_improvement"
BEST_IMPROVEMENT = "best_improvement"

# relative slack covering floating error of the screening sums
_SCREEN_REL = 1e-9
_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True)
class SwapCandidate:
    incoming: tuple[int, ...]
    outgoing: tuple[int, ...]
    delta: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.incoming or len(self.incoming) != len(self.outgoing):
            raise InvalidSwapError("a swap exchanges equally many (>= 1) medians")
        if set(self.incoming) & set(self.outgoing):
            raise InvalidSwapError("incoming and outgoing sets overlap")

    @property
    def size(self) -> int:
        return len(self.outgoing)


@dataclass(frozen=True)
class SearchParams:
    ell: int = 1
    rho: float = 0.0
    strategy: str = FIRST_IMPROVEMENT
    max_swaps: int = 10**6

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.strategy not in (FIRST_IMPROVEMENT, BEST_IMPROVEMENT):
            raise ValueError(f"unknown strategy {self.strategy!r}")


def is_efficient(ledger: AssignmentLedger, candidate: SwapCandidate, rho: float) -> bool:
    delta = ledger.swap_delta(candidate.incoming, candidate.outgoing)
    return delta < -candidate.size * rho


# ---- screening -------------------------------------------------------------


def _screen_single(ledger: AssignmentLedger, closed: np.ndarray):
    S = ledger.median_positions
    n, k = ledger.n_clients, S.size
    d1, d2 = ledger.near_d, ledger.second_d
    sum_d1 = float(d1.sum())
    slot = np.searchsorted(S, ledger.near_pos)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), slot] = 1.0
    dist = ledger.dist
    D = np.empty((closed.size, k))
    margin = np.empty(closed.size)
    # d1, d2 <= p already, so min(d_p, d1) == min(d, d1)
    step = max(1, (1 << 17) // max(n, 1))
    G = np.empty((min(step, closed.size), n))
    H = np.empty_like(G)
    for lo in range(0, closed.size, step):
        rows = closed[lo : lo + step]
        m = rows.size
        g, h = G[:m], H[:m]
        block = dist[rows, :n]
        np.minimum(block, d1, out=g)
        np.minimum(block, d2, out=h)
        h -= g
        gsum = g.sum(axis=1)
        D[lo : lo + m] = (gsum - sum_d1)[:, None] + h @ onehot
        # a facility that brings no client closer cannot lower the cost
        D[lo : lo + m][~(block < d1).any(axis=1)] = INF
        margin[lo : lo + m] = _SCREEN_REL * (gsum + h.sum(axis=1) + sum_d1) + 1e-300
    return D, margin


def _combo_chunks(m: int, s: int, n: int) -> Iterator[np.ndarray]:
    per = max(1, _CHUNK_CELLS // max(n, 1))
    it = combinations(range(m), s)
    while True:
        chunk = list(islice(it, per))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def _screen_multi(ledger: AssignmentLedger, closed: np.ndarray, s: int, Cp_closed: np.ndarray):
    """Canonical-order screen of all s-swaps (s >= 2)."""
    S = ledger.median_positions
    n = ledger.n_clients
    sum_d1 = float(ledger.near_d.sum())
    useful = (Cp_closed < ledger.near_d).any(axis=1)
    for out in combinations(S.tolist(), s):
        out_arr = np.array(out, dtype=np.int64)
        R = ledger.remaining_values(out_arr)
        # closed is sorted, so row combinations are in facility-ordinal order
        for rows in _combo_chunks(closed.size, s, n):
            new = np.minimum(Cp_closed[rows].min(axis=1), R)
            tot = new.sum(axis=1)
            tot[~useful[rows].any(axis=1)] = INF
            margin = _SCREEN_REL * (tot + sum_d1) + 1e-300
            yield out_arr, closed[rows], tot - sum_d1, margin


def _exact(ledger: AssignmentLedger, inc, out) -> float:
    return ledger.exact_delta(
        ledger.swap_values(np.asarray(inc, dtype=np.int64), np.asarray(out, dtype=np.int64))
    )


def _candidate(ledger: AssignmentLedger, inc, out, delta: float) -> SwapCandidate:
    return SwapCandidate(
        tuple(ledger.facility_id(int(i)) for i in inc),
        tuple(ledger.facility_id(int(o)) for o in out),
        delta,
    )


def find_efficient_swap(
    ledger: AssignmentLedger, params: SearchParams, rho: float | None = None
) -> SwapCandidate | None:
    """Return a rho-efficient swap of size <= ell, or None if none exists.

    ``first_improvement`` returns the first efficient swap in canonical
    order (size, then outgoing set, then incoming set, by facility ordinal);
    ``best_improvement`` the most negative delta, ties in canonical order.
    """
    rho = params.rho if rho is None else float(rho)
    S = ledger.median_positions
    closed = np.flatnonzero(~ledger.open_mask)
    if S.size == 0 or closed.size == 0 or ledger.n_clients == 0:
        return None
    best_mode = params.strategy == BEST_IMPROVEMENT
    pool = []  # (approx, margin, key, inc, out) for best-improvement

    D, margin = _screen_single(ledger, closed)
    thr = -rho
    passing = (D < thr + margin[:, None]).T  # outgoing-major
    if best_mode:
        for o, r in zip(*np.nonzero(passing)):
            pool.append((D[r, o], margin[r], (1, o, r), (closed[r],), (S[o],)))
    else:
        for o, r in zip(*np.nonzero(passing)):
            delta = _exact(ledger, [closed[r]], [S[o]])
            if delta < thr:
                return _candidate(ledger, [closed[r]], [S[o]], delta)

    max_s = min(params.ell, S.size, closed.size)
    if max_s >= 2:
        Cp_closed = ledger.truncated_rows(closed)
        for s in range(2, max_s + 1):
            thr = -s * rho
            for out_arr, chunk, approx, marg in _screen_multi(ledger, closed, s, Cp_closed):
                hits = np.flatnonzero(approx < thr + marg)
                for h in hits:
                    inc = chunk[h]
                    if best_mode:
                        key = (s, tuple(out_arr.tolist()), tuple(inc.tolist()))
                        pool.append((approx[h], marg[h], key, tuple(inc), tuple(out_arr)))
                        continue
                    delta = _exact(ledger, inc, out_arr)
                    if delta < thr:
                        return _candidate(ledger, inc, out_arr, delta)

    if not best_mode or not pool:
        return None
    lowest = min(a for a, *_ in pool)
    slack = 2 * max(m for _, m, *_ in pool)
    chosen = None
    for approx, _, key, inc, out in pool:
        if approx > lowest + slack:
            continue
        delta = _exact(ledger, inc, out)
        if delta < -len(out) * rho and (chosen is None or (delta, key) < (chosen[0], chosen[1])):
            chosen = (delta, key, inc, out)
    if chosen is None:
        return None
    return _candidate(ledger, chosen[2], chosen[3], chosen[0])


def local_search_to_optimum(
    ledger: AssignmentLedger,
    params: SearchParams,
    rho_rule: Callable[[float], float] | None = None,
    recourse: RecourseLog | None = None,
    t: int = 0,
    trace: list | None = None,
) -> int:
    """Apply efficient swaps until none is left; returns the number applied.

    ``rho_rule`` maps the current cost_p to rho and is re-evaluated before
    every search; without it ``params.rho`` is used throughout.
    """
    swaps = 0
    while True:
        rho = rho_rule(ledger.cost_p) if rho_rule is not None else params.rho
        cand = find_efficient_swap(ledger, params, rho)
        if cand is None:
            return swaps
        if swaps >= params.max_swaps:
            log.warning("local search stopped at the %d-swap cap", params.max_swaps)
            return swaps
        ledger.apply_swap(cand.incoming, cand.outgoing, recourse, t)
        swaps += 1
        if trace is not None:
            trace.append((cand, ledger.cost_p))


def _solution(ledger: AssignmentLedger) -> Solution:
    return Solution(
        medians=ledger.medians,
        outliers=ledger.outlier_ids(),
        penalty=ledger.p,
        cost_p=ledger.cost_p,
        inlier_cost=ledger.inlier_cost(),
    )


def offline_penalty_local_search(
    instance: Instance,
    p: float,
    params: SearchParams | None = None,
    rho_rule: Callable[[float], float] | None = None,
    init: list[int] | None = None,
) -> Solution:
    """Local search for k-median under d_p from the first k facilities.

    Outliers of the result are the clients with d(j, S) >= p.
    """
    params = params or SearchParams()
    if instance.k > len(instance.facilities):
        raise InfeasibleError(f"k={instance.k} exceeds |F|={len(instance.facilities)}")
    start = instance.facilities[: instance.k] if init is None else list(init)
    if len(start) != instance.k:
        raise InfeasibleError("initial median set must have exactly k facilities")
    ledger = build_ledger(instance, start, p)
    local_search_to_optimum(ledger, params, rho_rule)
    return _solution(ledger)


def guess_grid(lo: float, hi: float, factor: float = 2.0) -> list[float]:
    """Geometric grid lo * factor**i up to the first value >= hi.

    Exponents are built as i * log2(factor) rounded to 12 decimals so that a
    grid with factor sqrt(f) contains every point of the grid with factor f.
    """
    if not factor > 1:
        raise ValueError("grid factor must exceed 1")
    step = math.log2(factor)
    out = []
    i = 0
    while True:
        g = lo * 2.0 ** round(i * step, 12)
        out.append(g)
        if g >= hi:
            return out
        i += 1


def bicriteria_penalty(guess: float, ell: int, gamma: float, z: int) -> float:
    return (3 * ell + 2) * guess / ((ell + 1) * gamma * z)


def offline_bicriteria(
    instance: Instance,
    ell: int = 1,
    gamma: float = 1.0,
    guess_factor: float = 2.0,
    params: SearchParams | None = None,
    rho_rule: Callable[[float], float] | None = None,
) -> Solution:
    """Penalty local search over a geometric grid of guesses for opt.

    Returns the solution of least inlier cost among those with at most
    (1 + 1/ell)(1 + gamma) z outliers.
    """
    z = instance.z
    if z == 0:
        raise BicriteriaInapplicableError(
            "z = 0: run offline_penalty_local_search with p = inf instead"
        )
    if instance.k > len(instance.facilities):
        raise InfeasibleError(f"k={instance.k} exceeds |F|={len(instance.facilities)}")
    params = replace(params or SearchParams(), ell=ell)
    ids = set(instance.facilities) | set(instance.clients)
    if len(ids) >= 2:
        dmin, dmax = instance.space.diameter_bounds(ids)
    else:
        dmin, dmax = INF, 0.0
    offset = 0.1
    lo = offset if math.isinf(dmin) else min(offset, 0.1 * dmin)
    hi = max(instance.n * dmax + offset, lo)
    allowed = (1 + 1 / ell) * (1 + gamma) * z
    best = None
    for g in guess_grid(lo, hi, guess_factor):
        p = bicriteria_penalty(g, ell, gamma, z)
        sol = offline_penalty_local_search(instance, p, params, rho_rule)
        if len(sol.outliers) <= allowed and (best is None or sol.inlier_cost < best.inlier_cost):
            best = sol
        if p > dmax:
            # d_p == d from here on; larger guesses repeat this run
            break
    if best is None:
        raise InfeasibleError("no grid point met the outlier budget")
    return best
