"""Shared instance builders and hypothesis strategies for the test suite."""
from __future__ import annotations

import random

import numpy as np
from hypothesis import strategies as st

from online_kmedian import MetricSpace
from online_kmedian.ledger import Instance


def grid_points(rng: random.Random, n: int, side: int = 20, dim: int = 2) -> np.ndarray:
    return np.array([[rng.randint(0, side) for _ in range(dim)] for _ in range(n)], dtype=float)


def integer_matrix(rng: random.Random, n: int, hi: int = 30) -> np.ndarray:
    """Random symmetric integer matrix with zero diagonal (need not be metric)."""
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = rng.randint(1, hi)
    return m


def static_instance(rng: random.Random, n_fac: int, n_cli: int, k: int, z: int = 0, dim: int = 2):
    """Facilities are ids 0..n_fac-1, clients follow."""
    space = MetricSpace.euclidean(grid_points(rng, n_fac + n_cli, dim=dim))
    return Instance(space, list(range(n_fac)), list(range(n_fac, n_fac + n_cli)), k, z)


def tiny_static_family(seed: int):
    """Instance family of the optimality checks: |F| <= 8, |C| <= 12, k <= 3."""
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    n_fac = rng.randint(k + 1, 8)
    n_cli = rng.randint(3, 12)
    return rng, static_instance(rng, n_fac, n_cli, k)


@st.composite
def explicit_spaces(draw, min_n=2, max_n=9, hi=30):
    n = draw(st.integers(min_n, max_n))
    vals = draw(st.lists(st.integers(1, hi), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    m = np.zeros((n, n))
    it = iter(vals)
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = next(it)
    return MetricSpace.explicit(m)


@st.composite
def coordinate_sets(draw, min_n=1, max_n=12, dim=None):
    d = dim if dim is not None else draw(st.integers(1, 4))
    n = draw(st.integers(min_n, max_n))
    coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
    return np.array(draw(st.lists(st.lists(coord, min_size=d, max_size=d), min_size=n, max_size=n)))
