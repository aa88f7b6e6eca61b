"""Point storage and distance evaluation.

Every distance in the package goes through :func:`_euclidean_block` (or the
explicit matrix lookup), so a value computed for a single pair is bitwise
identical to the same pair inside a larger block. Ledger rebuild equality and
the brute-force oracles depend on that.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, UnsupportedModeError

INF = math.inf

_CHUNK = 1024


def _euclidean_block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # per-dimension accumulation keeps each entry independent of block shape
    acc = np.zeros((a.shape[0], b.shape[0]))
    for d in range(a.shape[1]):
        diff = a[:, d][:, None] - b[:, d][None, :]
        acc += diff * diff
    return np.sqrt(acc)


class MetricSpace:
    """Either Euclidean coordinates or an explicit distance matrix.

    Point ids are dense zero-based ordinals. Euclidean spaces may grow via
    :meth:`append`; explicit spaces are fixed at construction.
    """

    def __init__(self, coords=None, matrix=None, scale: float = 1.0):
        if (coords is None) == (matrix is None):
            raise ValueError("give exactly one of coords or matrix")
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError(f"scale must be a positive finite real, got {scale!r}")
        self.scale = float(scale)
        self._version = 0
        self._bounds_cache: dict = {}
        self._cache: np.ndarray | None = None
        if coords is not None:
            arr = np.array(coords, dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2 or arr.shape[1] < 1:
                raise ValueError("coords must be an (n, dim) array with dim >= 1")
            if not np.all(np.isfinite(arr)):
                raise ValueError("coords must be finite")
            self.mode = "euclidean"
            self._coords = arr.copy()
            self._n = arr.shape[0]
            self._matrix = None
        else:
            m = np.array(matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("distance matrix must be square")
            if not np.all(np.isfinite(m)) or np.any(m < 0):
                raise ValueError("distances must be finite and non-negative")
            if not np.array_equal(m, m.T):
                raise ValueError("distance matrix must be symmetric")
            if np.any(np.diag(m) != 0):
                raise ValueError("distance matrix must have a zero diagonal")
            self.mode = "explicit"
            self._matrix = m
            self._coords = None
            self._n = m.shape[0]

    @classmethod
    def euclidean(cls, coords, scale: float = 1.0) -> "MetricSpace":
        return cls(coords=coords, scale=scale)

    @classmethod
    def explicit(cls, matrix, scale: float = 1.0) -> "MetricSpace":
        return cls(matrix=matrix, scale=scale)

    def __len__(self) -> int:
        return self._n

    @property
    def dim(self) -> int | None:
        return None if self._coords is None else self._coords.shape[1]

    @property
    def coords(self) -> np.ndarray:
        if self._coords is None:
            raise UnsupportedModeError("explicit spaces carry no coordinates")
        return self._coords[: self._n]

    def append(self, coord) -> int:
        """Add a point (Euclidean mode only) and return its id."""
        if self._coords is None:
            raise UnsupportedModeError("cannot append to an explicit-matrix space")
        row = np.asarray(coord, dtype=float).reshape(-1)
        if row.shape[0] != self._coords.shape[1]:
            raise ValueError(f"expected {self._coords.shape[1]} coordinates, got {row.shape[0]}")
        if self._n == self._coords.shape[0]:
            grown = np.empty((max(4, 2 * self._n), self._coords.shape[1]))
            grown[: self._n] = self._coords[: self._n]
            self._coords = grown
        self._coords[self._n] = row
        self._n += 1
        self._version += 1
        return self._n - 1

    def cache_pairwise(self) -> None:
        """Precompute all pairwise distances of the current points.

        Memory is quadratic in the number of points; meant for desk-scale runs.
        """
        ids = np.arange(self._n)
        self._cache = self._compute(ids, ids)

    def _check(self, ids: np.ndarray) -> None:
        if ids.size and (ids.min() < 0 or ids.max() >= self._n):
            bad = ids[(ids < 0) | (ids >= self._n)][0]
            raise IndexError(f"point id {int(bad)} out of range for space of size {self._n}")

    def _compute(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            raw = self._matrix[np.ix_(rows, cols)]
        else:
            raw = _euclidean_block(self._coords[rows], self._coords[cols])
        return raw * self.scale

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Scaled distances between every id in ``rows`` and every id in ``cols``."""
        r = np.asarray(rows, dtype=np.int64).reshape(-1)
        c = np.asarray(cols, dtype=np.int64).reshape(-1)
        self._check(r)
        self._check(c)
        cache = self._cache
        if cache is not None and (r.size == 0 or r.max() < cache.shape[0]) and (
            c.size == 0 or c.max() < cache.shape[0]
        ):
            return cache[np.ix_(r, c)]
        return self._compute(r, c)

    def distance(self, u: int, v: int) -> float:
        return float(self.block([u], [v])[0, 0])

    def truncated_distance(self, u: int, v: int, p: float) -> float:
        if p < 0:
            raise ValueError("penalty must be non-negative")
        return min(self.distance(u, v), p)

    def diameter_bounds(self, ids: Iterable[int]) -> tuple[float, float]:
        """(smallest strictly positive distance, largest distance) over ``ids``.

        Exact full scan; cached until the space grows. If every pair
        coincides the minimum is reported as ``inf``.
        """
        key_ids = tuple(sorted(set(int(i) for i in ids)))
        if len(key_ids) < 2:
            raise DegenerateInputError("diameter bounds need at least two distinct ids")
        key = (self._version, key_ids)
        hit = self._bounds_cache.get(key)
        if hit is not None:
            return hit
        arr = np.array(key_ids, dtype=np.int64)
        self._check(arr)
        lo, hi = INF, 0.0
        for start in range(0, arr.size, _CHUNK):
            blk = self.block(arr[start : start + _CHUNK], arr)
            hi = max(hi, float(blk.max()))
            pos = blk[blk > 0]
            if pos.size:
                lo = min(lo, float(pos.min()))
        self._bounds_cache[key] = (lo, hi)
        return lo, hi
