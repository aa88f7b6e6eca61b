"""Problem snapshots, solutions, the truncated-cost ledger and recourse log.

The ledger keeps, for every client, its nearest and second-nearest median
under the truncated metric ``d_p(u, v) = min(d(u, v), p)``. Ties go to the
lowest facility ordinal (position in the facility list). The connection sum
is always ``math.fsum`` of the per-client nearest distances, so a ledger
reached through any sequence of updates agrees bit-for-bit with one built
from scratch on the same (C, S, p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicatePointError,
    InvalidSolutionError,
    InvalidSwapError,
    PenaltyMonotonicityError,
)
from .metric import INF, MetricSpace

OFFSET = 0.1


@dataclass
class Instance:
    """A static k-median-with-outliers snapshot (F, C, d, k, z)."""

    space: MetricSpace
    facilities: list[int]
    clients: list[int]
    k: int
    z: int = 0

    def __post_init__(self):
        self.facilities = [int(i) for i in self.facilities]
        self.clients = [int(j) for j in self.clients]
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.z < 0:
            raise ValueError("z must be non-negative")
        if len(set(self.facilities)) != len(self.facilities):
            raise ValueError("duplicate facility ids")
        if len(set(self.clients)) != len(self.clients):
            raise ValueError("duplicate client ids")
        n = len(self.space)
        for pid in self.facilities + self.clients:
            if not 0 <= pid < n:
                raise IndexError(f"point id {pid} out of range for space of size {n}")

    @property
    def n(self) -> int:
        return len(self.clients)


@dataclass(frozen=True)
class Solution:
    medians: tuple[int, ...]
    outliers: tuple[int, ...]
    penalty: float = INF
    cost_p: float | None = None
    # offset + sum of d(j, S) over clients not in ``outliers``
    inlier_cost: float | None = None


@dataclass
class RecourseEntry:
    t: int
    added: frozenset
    removed: frozenset


@dataclass
class RecourseLog:
    """Per-step net median changes.

    Swaps applied at the same time step are merged, so ``added`` is exactly
    ``S_t minus S_{t-1}`` and ``total`` is the one-sided recourse sum.
    ``swap_additions`` counts every median brought in by any swap; it only
    exceeds ``total`` when a step swaps a median out and back in.
    """

    entries: list[RecourseEntry] = field(default_factory=list)
    total: int = 0
    swap_additions: int = 0

    def record(self, t: int, incoming: Iterable[int], outgoing: Iterable[int]) -> None:
        inc, out = frozenset(incoming), frozenset(outgoing)
        self.swap_additions += len(inc)
        if self.entries and self.entries[-1].t == t:
            last = self.entries[-1]
            added = (last.added - out) | (inc - last.removed)
            removed = (last.removed - inc) | (out - last.added)
            self.total += len(added) - len(last.added)
            last.added, last.removed = added, removed
        else:
            if self.entries and t < self.entries[-1].t:
                raise ValueError("recourse entries must be recorded in time order")
            self.entries.append(RecourseEntry(t, inc, out))
            self.total += len(inc)

    def at(self, t: int) -> int:
        """Recourse of step ``t`` (medians added relative to step t-1)."""
        for e in reversed(self.entries):
            if e.t == t:
                return len(e.added)
            if e.t < t:
                break
        return 0

    @property
    def two_sided_total(self) -> int:
        return sum(len(e.added) + len(e.removed) for e in self.entries)


def _grow(arr: np.ndarray, n: int, fill) -> np.ndarray:
    if n <= arr.shape[0]:
        return arr
    out = np.full((max(n, 2 * arr.shape[0], 8),) + arr.shape[1:], fill, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


class AssignmentLedger:
    """Current medians S with cached nearest / second-nearest assignments.

    Facility and client ids are point ids of ``space``; internally they are
    addressed by their position in the facility and client lists.
    """

    def __init__(
        self,
        space: MetricSpace,
        facilities: Sequence[int],
        clients: Sequence[int],
        medians: Iterable[int],
        p: float = INF,
        offset: float = OFFSET,
    ):
        if p < 0 or math.isnan(p):
            raise ValueError("penalty must be non-negative")
        self.space = space
        self.offset = float(offset)
        self.p = float(p)
        self._fac: list[int] = []
        self._fpos: dict[int, int] = {}
        self._cli: list[int] = []
        self._cpos: dict[int, int] = {}
        self._dist = np.zeros((0, 0))
        self._near = np.zeros(0, dtype=np.int64)
        self._near_d = np.zeros(0)
        self._second = np.zeros(0, dtype=np.int64)
        self._second_d = np.zeros(0)
        self._in_s = np.zeros(0, dtype=bool)

        facilities = [int(i) for i in facilities]
        clients = [int(j) for j in clients]
        if len(set(facilities)) != len(facilities):
            raise ValueError("duplicate facility ids")
        if len(set(clients)) != len(clients):
            raise DuplicatePointError("duplicate client ids")
        self._fac = facilities
        self._fpos = {pid: i for i, pid in enumerate(facilities)}
        self._cli = clients
        self._cpos = {pid: j for j, pid in enumerate(clients)}
        nf, nc = len(facilities), len(clients)
        self._dist = np.zeros((max(nf, 8), max(nc, 8)))
        if nf and nc:
            self._dist[:nf, :nc] = space.block(facilities, clients)
        self._in_s = np.zeros(max(nf, 8), dtype=bool)

        med = [int(m) for m in medians]
        if len(set(med)) != len(med):
            raise InvalidSolutionError("duplicate medians")
        missing = [m for m in med if m not in self._fpos]
        if missing:
            raise InvalidSolutionError(f"medians {missing} are not facilities")
        self._S = np.array(sorted(self._fpos[m] for m in med), dtype=np.int64)
        self._in_s[self._S] = True

        cap = max(nc, 8)
        self._near = np.full(cap, -1, dtype=np.int64)
        self._near_d = np.zeros(cap)
        self._second = np.full(cap, -1, dtype=np.int64)
        self._second_d = np.zeros(cap)
        if nc:
            self._assign(np.arange(nc))
        self._refresh_total()

    # ---- read access -------------------------------------------------
    @property
    def n_clients(self) -> int:
        return len(self._cli)

    @property
    def n_facilities(self) -> int:
        return len(self._fac)

    @property
    def k(self) -> int:
        return int(self._S.size)

    @property
    def facilities(self) -> list[int]:
        return list(self._fac)

    @property
    def clients(self) -> list[int]:
        return list(self._cli)

    @property
    def medians(self) -> tuple[int, ...]:
        return tuple(self._fac[i] for i in self._S)

    @property
    def median_positions(self) -> np.ndarray:
        return self._S

    @property
    def open_mask(self) -> np.ndarray:
        return self._in_s[: self.n_facilities]

    @property
    def dist(self) -> np.ndarray:
        """Raw facility-by-client distances (positions), read-only view."""
        v = self._dist[: self.n_facilities, : self.n_clients]
        v.flags.writeable = False
        return v

    @property
    def near_pos(self) -> np.ndarray:
        return self._near[: self.n_clients]

    @property
    def near_d(self) -> np.ndarray:
        return self._near_d[: self.n_clients]

    @property
    def second_pos(self) -> np.ndarray:
        return self._second[: self.n_clients]

    @property
    def second_d(self) -> np.ndarray:
        return self._second_d[: self.n_clients]

    @property
    def connection(self) -> float:
        """Sum of truncated nearest distances, without the offset."""
        return self._connection

    @property
    def cost_p(self) -> float:
        return self.offset + self._connection

    def is_client(self, j: int) -> bool:
        return int(j) in self._cpos

    def facility_position(self, pid: int) -> int:
        try:
            return self._fpos[int(pid)]
        except KeyError:
            raise InvalidSwapError(f"{pid} is not a facility") from None

    def facility_id(self, pos: int) -> int:
        return self._fac[pos]

    def nearest(self, j: int) -> tuple[int | None, float, int | None, float]:
        """(nearest id, its d_p, second-nearest id, its d_p) for client ``j``."""
        c = self._cpos[int(j)]
        a, b = int(self._near[c]), int(self._second[c])
        return (
            self._fac[a] if a >= 0 else None,
            float(self._near_d[c]),
            self._fac[b] if b >= 0 else None,
            float(self._second_d[c]),
        )

    def count_outliers(self) -> int:
        if math.isinf(self.p):
            return 0
        return int(np.count_nonzero(self.near_d == self.p))

    def outlier_ids(self) -> tuple[int, ...]:
        if math.isinf(self.p):
            return ()
        return tuple(self._cli[c] for c in np.flatnonzero(self.near_d == self.p))

    def inlier_cost(self) -> float:
        """Offset plus d(j, S) summed over clients strictly closer than p."""
        nd = self.near_d
        return self.offset + math.fsum(nd[nd < self.p].tolist())

    def truncated_rows(self, fpos) -> np.ndarray:
        """d_p from the given facility positions to every client."""
        return np.minimum(self._dist[np.asarray(fpos), : self.n_clients], self.p)

    def snapshot(self) -> dict:
        """Everything a from-scratch rebuild must reproduce."""
        return {
            "medians": self.medians,
            "p": self.p,
            "clients": tuple(self._cli),
            "near": self.near_pos.copy(),
            "near_d": self.near_d.copy(),
            "second": self.second_pos.copy(),
            "second_d": self.second_d.copy(),
            "connection": self._connection,
            "cost_p": self.cost_p,
        }

    # ---- internals ---------------------------------------------------
    def _refresh_total(self) -> None:
        self._connection = math.fsum(self.near_d.tolist())

    def _assign(self, cols: np.ndarray) -> None:
        S = self._S
        if cols.size == 0:
            return
        if S.size == 0:
            self._near[cols] = -1
            self._near_d[cols] = self.p
            self._second[cols] = -1
            self._second_d[cols] = self.p
            return
        M = np.minimum(self._dist[np.ix_(S, cols)], self.p)
        ar = np.arange(cols.size)
        i1 = M.argmin(axis=0)
        self._near[cols] = S[i1]
        self._near_d[cols] = M[i1, ar]
        if S.size >= 2:
            M[i1, ar] = INF
            i2 = M.argmin(axis=0)
            self._second[cols] = S[i2]
            self._second_d[cols] = M[i2, ar]
        else:
            self._second[cols] = -1
            self._second_d[cols] = self.p

    def _validate_swap(self, incoming, outgoing) -> tuple[np.ndarray, np.ndarray]:
        inc = [self.facility_position(i) for i in incoming]
        out = [self.facility_position(i) for i in outgoing]
        if not inc or len(inc) != len(out):
            raise InvalidSwapError("a swap exchanges equally many (>= 1) medians")
        if len(set(inc)) != len(inc) or len(set(out)) != len(out):
            raise InvalidSwapError("swap sets contain duplicates")
        if any(self._in_s[i] for i in inc):
            raise InvalidSwapError("incoming medians must lie outside S")
        if not all(self._in_s[i] for i in out):
            raise InvalidSwapError("outgoing medians must lie in S")
        return np.array(sorted(inc), dtype=np.int64), np.array(sorted(out), dtype=np.int64)

    def remaining_values(self, out: np.ndarray) -> np.ndarray:
        """Per-client d_p to S with positions ``out`` closed and nothing opened."""
        # one spare slot so that second_pos == -1 looks up False
        closing = np.zeros(self.n_facilities + 1, dtype=bool)
        closing[out] = True
        R = self.near_d.copy()
        lost1 = closing[self.near_pos]
        R[lost1] = self.second_d[lost1]
        lost2 = lost1 & closing[self.second_pos]
        if lost2.any():
            rest = self._S[~closing[self._S]]
            idx = np.flatnonzero(lost2)
            if rest.size:
                R[idx] = np.minimum(self._dist[np.ix_(rest, idx)], self.p).min(axis=0)
            else:
                R[idx] = self.p
        return R

    def swap_values(self, inc: np.ndarray, out: np.ndarray) -> np.ndarray:
        """Per-client d_p after swapping positions ``out`` for ``inc`` (unvalidated)."""
        cand = np.minimum(self._dist[inc, : self.n_clients], self.p).min(axis=0)
        return np.minimum(self.remaining_values(out), cand)

    def exact_delta(self, new_values: np.ndarray) -> float:
        """Correctly rounded sum of (new - old) over clients."""
        old = self.near_d
        changed = new_values != old  # unchanged pairs cancel exactly
        return math.fsum(new_values[changed].tolist() + (-old[changed]).tolist())

    # ---- operations --------------------------------------------------
    def swap_delta(self, incoming: Iterable[int], outgoing: Iterable[int]) -> float:
        """Change of cost_p if medians ``outgoing`` were replaced by ``incoming``."""
        inc, out = self._validate_swap(list(incoming), list(outgoing))
        return self.exact_delta(self.swap_values(inc, out))

    def apply_swap(
        self,
        incoming: Iterable[int],
        outgoing: Iterable[int],
        recourse: RecourseLog | None = None,
        t: int = 0,
    ) -> float:
        """Perform the swap in place; returns its (exact) cost delta."""
        incoming, outgoing = list(incoming), list(outgoing)
        inc, out = self._validate_swap(incoming, outgoing)
        delta = self.exact_delta(self.swap_values(inc, out))
        self._in_s[out] = False
        self._in_s[inc] = True
        self._S = np.flatnonzero(self._in_s[: self.n_facilities]).astype(np.int64)
        self._assign(np.arange(self.n_clients))
        self._refresh_total()
        if recourse is not None:
            recourse.record(t, incoming, outgoing)
        return delta

    def insert_point(self, j: int) -> float:
        """Add client ``j``; returns its truncated distance to S (the cost increase)."""
        j = int(j)
        if j in self._cpos:
            raise DuplicatePointError(f"point {j} is already a client")
        if not 0 <= j < len(self.space):
            raise IndexError(f"point id {j} out of range for space of size {len(self.space)}")
        c = len(self._cli)
        if c + 1 > self._dist.shape[1]:
            grown = np.zeros((self._dist.shape[0], max(2 * self._dist.shape[1], 8)))
            grown[:, : self._dist.shape[1]] = self._dist
            self._dist = grown
        nf = self.n_facilities
        if nf:
            self._dist[:nf, c] = self.space.block(self._fac, [j])[:, 0]
        self._cli.append(j)
        self._cpos[j] = c
        self._near = _grow(self._near, c + 1, -1)
        self._near_d = _grow(self._near_d, c + 1, 0.0)
        self._second = _grow(self._second, c + 1, -1)
        self._second_d = _grow(self._second_d, c + 1, 0.0)
        self._assign(np.array([c]))
        self._refresh_total()
        return float(self._near_d[c])

    def add_facility(self, i: int) -> None:
        """Make point ``i`` a candidate median (F = C growth); S is unchanged."""
        i = int(i)
        if i in self._fpos:
            raise DuplicatePointError(f"point {i} is already a facility")
        f = len(self._fac)
        if f + 1 > self._dist.shape[0]:
            grown = np.zeros((max(2 * self._dist.shape[0], 8), self._dist.shape[1]))
            grown[: self._dist.shape[0]] = self._dist
            self._dist = grown
        nc = self.n_clients
        if nc:
            self._dist[f, :nc] = self.space.block([i], self._cli)[0]
        self._fac.append(i)
        self._fpos[i] = f
        self._in_s = _grow(self._in_s, f + 1, False)

    def add_median(self, i: int, recourse: RecourseLog | None = None, t: int = 0) -> None:
        """Open facility ``i`` without closing anything (warm-up only)."""
        f = self.facility_position(i)
        if self._in_s[f]:
            raise InvalidSolutionError(f"{i} is already a median")
        self._in_s[f] = True
        self._S = np.flatnonzero(self._in_s[: self.n_facilities]).astype(np.int64)
        self._assign(np.arange(self.n_clients))
        self._refresh_total()
        if recourse is not None:
            recourse.record(t, [int(i)], [])

    def raise_penalty(self, new_p: float) -> None:
        if new_p < self.p:
            raise PenaltyMonotonicityError(f"penalty may only grow ({self.p} -> {new_p})")
        if new_p == self.p:
            return
        old = self.p
        self.p = float(new_p)
        # clients whose two smallest values sit below the old cap keep them
        touched = np.flatnonzero(self.second_d >= old)
        self._assign(touched)
        self._refresh_total()


def build_ledger(
    instance: Instance, medians: Iterable[int], p: float = INF, offset: float = OFFSET
) -> AssignmentLedger:
    return AssignmentLedger(
        instance.space, instance.facilities, instance.clients, medians, p, offset
    )


def ledgers_equal(a: AssignmentLedger, b: AssignmentLedger) -> bool:
    sa, sb = a.snapshot(), b.snapshot()
    for key, va in sa.items():
        vb = sb[key]
        if isinstance(va, np.ndarray):
            if not np.array_equal(va, vb):
                return False
        elif va != vb:
            return False
    return True
