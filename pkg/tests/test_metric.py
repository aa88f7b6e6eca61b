import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from online_kmedian import DegenerateInputError, MetricSpace
from strategies import coordinate_sets


def test_three_four_five():
    sp = MetricSpace.euclidean([[0, 0], [3, 4]])
    assert sp.distance(0, 1) == 5.0
    assert sp.distance(1, 0) == 5.0
    assert sp.truncated_distance(0, 1, 2.5) == 2.5
    assert sp.truncated_distance(0, 1, 7) == 5.0


def test_scale_multiplies_distances():
    sp = MetricSpace.euclidean([[0, 0], [3, 4]], scale=0.5)
    assert sp.distance(0, 1) == 2.5


def test_block_shape_and_diagonal():
    sp = MetricSpace.euclidean(np.arange(12.0).reshape(4, 3))
    b = sp.block([0, 1, 2, 3], [0, 1, 2, 3])
    assert b.shape == (4, 4)
    assert np.all(np.diag(b) == 0)
    assert np.array_equal(b, b.T)


def test_block_rejects_unknown_ids():
    sp = MetricSpace.euclidean([[0.0], [1.0]])
    with pytest.raises(IndexError):
        sp.block([0], [2])
    with pytest.raises(IndexError):
        sp.distance(-1, 0)


@pytest.mark.parametrize(
    "matrix",
    [
        [[0, 1], [2, 0]],  # asymmetric
        [[0, -1], [-1, 0]],  # negative
        [[1, 1], [1, 0]],  # nonzero diagonal
        [[0, 1, 2], [1, 0, 3]],  # not square
        [[0, math.nan], [math.nan, 0]],
    ],
)
def test_explicit_validation(matrix):
    with pytest.raises(ValueError):
        MetricSpace.explicit(matrix)


def test_explicit_lookup():
    sp = MetricSpace.explicit([[0, 2, 7], [2, 0, 4], [7, 4, 0]])
    assert sp.mode == "explicit"
    assert sp.distance(0, 2) == 7.0
    assert sp.block([2], [0, 1]).tolist() == [[7.0, 4.0]]


def test_append_grows_space():
    sp = MetricSpace.euclidean([[0.0, 0.0]])
    for i in range(1, 40):
        assert sp.append([float(i), 0.0]) == i
    assert len(sp) == 40
    assert sp.distance(0, 39) == 39.0


def test_append_rejected_for_explicit():
    sp = MetricSpace.explicit([[0, 1], [1, 0]])
    with pytest.raises(Exception):
        sp.append([0.0])


def test_diameter_bounds():
    sp = MetricSpace.euclidean([[0.0], [0.0], [2.0], [7.0]])
    assert sp.diameter_bounds(range(4)) == (2.0, 7.0)
    assert sp.diameter_bounds([0, 1]) == (math.inf, 0.0)
    with pytest.raises(DegenerateInputError):
        sp.diameter_bounds([0])


@given(coordinate_sets(min_n=2), st.randoms(use_true_random=False))
def test_block_values_independent_of_shape_and_cache(coords, rnd):
    sp = MetricSpace.euclidean(coords)
    n = len(coords)
    full = sp.block(range(n), range(n))
    rows = [rnd.randrange(n) for _ in range(rnd.randint(1, n))]
    cols = [rnd.randrange(n) for _ in range(rnd.randint(1, n))]
    assert np.array_equal(sp.block(rows, cols), full[np.ix_(rows, cols)])
    for u in rows:
        for v in cols:
            assert sp.distance(u, v) == full[u, v]
    sp.cache_pairwise()
    assert np.array_equal(sp.block(rows, cols), full[np.ix_(rows, cols)])


@given(coordinate_sets(min_n=3))
def test_triangle_inequality(coords):
    sp = MetricSpace.euclidean(coords)
    d = sp.block(range(len(coords)), range(len(coords)))
    assert np.all(d >= 0)
    assert np.array_equal(d, d.T)
    slack = 1e-9 * (1 + d.max())
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + slack)
