import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from online_kmedian import (
    BEST_IMPROVEMENT,
    FIRST_IMPROVEMENT,
    BicriteriaInapplicableError,
    InfeasibleError,
    InvalidSwapError,
    MetricSpace,
    SearchParams,
    SwapCandidate,
    build_ledger,
    find_efficient_swap,
    is_efficient,
    local_search_to_optimum,
    offline_bicriteria,
    offline_penalty_local_search,
)
from online_kmedian.ledger import Instance
from online_kmedian.local_search import guess_grid
from online_kmedian.oracle import exhaustive_efficient_swaps
from strategies import static_instance


def _random_state(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    inst = static_instance(rng, rng.randint(k + 1, 8), rng.randint(2, 12), k)
    medians = rng.sample(inst.facilities, k)
    p = rng.choice([math.inf, float(rng.randint(1, 15)), rng.uniform(0.5, 12)])
    return rng, inst, medians, p


def test_candidate_validation():
    with pytest.raises(InvalidSwapError):
        SwapCandidate((1,), (1,))
    with pytest.raises(InvalidSwapError):
        SwapCandidate((1, 2), (3,))
    assert SwapCandidate((1,), (2,), -3.0) == SwapCandidate((1,), (2,))


@pytest.mark.parametrize("kw", [{"ell": 0}, {"rho": -1}, {"strategy": "random"}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SearchParams(**kw)


@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.floats(0, 3))
def test_first_improvement_agrees_with_enumeration(seed, ell, rho):
    _, inst, medians, p = _random_state(seed)
    led = build_ledger(inst, medians, p)
    hits = exhaustive_efficient_swaps(inst, medians, p, ell, rho=rho)
    cand = find_efficient_swap(led, SearchParams(ell=ell, strategy=FIRST_IMPROVEMENT), rho)
    if not hits:
        assert cand is None
    else:
        # the enumeration runs in canonical order
        assert (cand.incoming, cand.outgoing) == hits[0][:2]
        assert cand.delta == hits[0][2]


@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.floats(0, 3))
def test_best_improvement_agrees_with_enumeration(seed, ell, rho):
    _, inst, medians, p = _random_state(seed)
    led = build_ledger(inst, medians, p)
    hits = exhaustive_efficient_swaps(inst, medians, p, ell, rho=rho)
    cand = find_efficient_swap(led, SearchParams(ell=ell, strategy=BEST_IMPROVEMENT), rho)
    if not hits:
        assert cand is None
    else:
        best = min(hits, key=lambda h: h[2])  # min() keeps the first of equals
        assert cand.delta == best[2]
        assert (cand.incoming, cand.outgoing) == best[:2]
        assert is_efficient(led, cand, rho)


@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.sampled_from([0.0, 0.05, 0.2]))
def test_search_ends_in_local_optimum(seed, ell, eps):
    _, inst, medians, p = _random_state(seed)
    led = build_ledger(inst, medians, p)
    trace = []
    rule = lambda c: eps * c / inst.k  # noqa: E731
    local_search_to_optimum(led, SearchParams(ell=ell), rule, trace=trace)
    costs = [c for _, c in trace]
    assert all(b < a for a, b in zip(costs, costs[1:]))
    rho = eps * led.cost_p / inst.k
    assert exhaustive_efficient_swaps(inst, list(led.medians), p, ell, rho=rho) == []


def test_zero_delta_swaps_are_not_efficient():
    # every client at the cap: all swaps change nothing
    sp = MetricSpace.euclidean([[0.0], [10.0], [20.0], [30.0]])
    inst = Instance(sp, [0, 1, 2, 3], [0, 1, 2, 3], 2)
    led = build_ledger(inst, [0, 1], p=1e-6)
    for strategy in (FIRST_IMPROVEMENT, BEST_IMPROVEMENT):
        assert find_efficient_swap(led, SearchParams(ell=2, strategy=strategy), 0.0) is None


def test_two_swap_needed():
    # single swaps cannot move both medians across; a 2-swap can
    pts = [[0.0], [0.2], [100.0], [100.2], [50.0], [50.2]]
    sp = MetricSpace.euclidean(pts)
    inst = Instance(sp, [0, 2, 4, 5], [0, 1, 2, 3], 2)
    led = build_ledger(inst, [4, 5])
    one = find_efficient_swap(led, SearchParams(ell=1), 0.0)
    two = find_efficient_swap(led, SearchParams(ell=2, strategy=BEST_IMPROVEMENT), 0.0)
    assert two.size == 2 and set(two.incoming) == {0, 2}
    assert one is None or one.delta > two.delta


def test_max_swaps_cap_stops_search(caplog):
    sp = MetricSpace.euclidean([[0.0], [1.0], [2.0], [40.0], [41.0]])
    inst = Instance(sp, [0, 1, 2, 3, 4], [0, 1, 2, 3, 4], 2)
    led = build_ledger(inst, [0, 2])
    assert find_efficient_swap(led, SearchParams(), 0.0) is not None
    assert local_search_to_optimum(led, SearchParams(max_swaps=0)) == 0
    assert led.medians == (0, 2)
    assert "cap" in caplog.text


def test_guess_grid():
    g = guess_grid(0.1, 10.0, 2.0)
    assert g[0] == 0.1 and g[-1] >= 10.0 and g[-2] < 10.0
    fine = guess_grid(0.1, 10.0, math.sqrt(2.0))
    assert set(g) <= set(fine)
    with pytest.raises(ValueError):
        guess_grid(1, 2, 1.0)


def test_offline_penalty_local_search_checks_k():
    sp = MetricSpace.euclidean([[0.0], [1.0]])
    with pytest.raises(InfeasibleError):
        offline_penalty_local_search(Instance(sp, [0], [0, 1], 2), 1.0)


def test_offline_penalty_local_search_small_p_marks_outliers():
    sp = MetricSpace.euclidean([[0.0], [1.0], [50.0]])
    sol = offline_penalty_local_search(Instance(sp, [0, 1, 2], [0, 1, 2], 1), 5.0)
    assert sol.outliers == (2,)
    assert sol.medians in ((0,), (1,))


def test_bicriteria_requires_outliers():
    sp = MetricSpace.euclidean([[0.0], [1.0]])
    with pytest.raises(BicriteriaInapplicableError):
        offline_bicriteria(Instance(sp, [0, 1], [0, 1], 1, 0))


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_bicriteria_outlier_budget(seed, z):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    inst = static_instance(rng, rng.randint(k, 8), rng.randint(3, 12), k, z)
    sol = offline_bicriteria(inst, ell=1, gamma=1.0)
    assert len(sol.outliers) <= 4 * z
    assert len(sol.medians) == k
    assert sol.inlier_cost <= sol.cost_p


def test_bicriteria_finds_planted_outlier():
    pts = np.array([[0.0], [1.0], [2.0], [20.0], [21.0], [22.0], [1000.0]])
    inst = Instance(MetricSpace.euclidean(pts), list(range(6)), list(range(7)), 2, 1)
    sol = offline_bicriteria(inst, ell=1, gamma=1.0)
    assert 6 in sol.outliers
    assert set(sol.medians) == {1, 4}
