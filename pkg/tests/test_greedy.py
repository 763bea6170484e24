import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersed import piecewise as pw
from dispersed.errors import BadKappa, TooLarge
from dispersed.greedy import (
    KnapsackInstance,
    MwisInstance,
    brute_force_knapsack,
    brute_force_mwis,
    gen_smoothed,
    instance_from_json,
    instance_to_json,
    knapsack_candidates,
    knapsack_curve,
    knapsack_greedy,
    knapsack_values,
    mwis_candidates,
    mwis_curve,
    mwis_greedy,
    mwis_values,
    tiered_knapsack,
)

THREE = KnapsackInstance([0.9, 0.8, 0.7], [2, 1, 1], 3)
PATH = MwisInstance.from_edges([0.6, 0.9, 0.6], [(0, 1), (1, 2)])


def subsets_knapsack(inst):
    best = 0.0
    for mask in range(1 << inst.n):
        idx = [i for i in range(inst.n) if mask >> i & 1]
        if sum(inst.sizes[idx]) <= inst.capacity:
            best = max(best, sum(inst.values[idx]))
    return best


def subsets_mwis(inst):
    best = 0.0
    for mask in range(1 << inst.n):
        idx = [i for i in range(inst.n) if mask >> i & 1]
        if not inst.adj[np.ix_(idx, idx)].any():
            best = max(best, sum(inst.weights[idx]))
    return best


# --- knapsack -----------------------------------------------------------------


def test_knapsack_examples():
    assert knapsack_greedy(KnapsackInstance([0.5], [2], 3), 1.0) == ({0}, 0.5)
    assert knapsack_greedy(THREE, 1.0) == ({0, 1}, pytest.approx(1.7))
    assert knapsack_greedy(THREE, 0.0) == knapsack_greedy(THREE, 0.0)
    assert brute_force_knapsack(THREE) == pytest.approx(1.7)
    assert brute_force_knapsack(KnapsackInstance([0.5, 0.4], [2, 3], 1.5)) == 0.0


def test_knapsack_candidates_examples():
    inst = KnapsackInstance([0.25, 0.5], [2, 4], 5)
    assert np.allclose(knapsack_candidates(inst, 10), [1.0])
    flat = KnapsackInstance([0.3, 0.9, 0.5], [2, 2, 2], 4)
    assert len(knapsack_candidates(flat, 10)) == 0
    assert knapsack_curve(flat).fn.n_pieces == 1


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.integers(2, 8))
def test_knapsack_curve_matches_grid(seed, n):
    rng = np.random.default_rng(seed)
    inst = gen_smoothed("knapsack", n, 3.0, rng)
    c = knapsack_curve(inst, 10.0)
    grid = np.linspace(0, 10, 1000, endpoint=False)
    direct = np.array([knapsack_greedy(inst, r)[1] for r in grid])
    assert np.array_equal(pw.evaluate(c.fn, grid), direct)
    assert np.array_equal(knapsack_values(inst, grid), direct)


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 12))
def test_knapsack_two_approximation(seed, n):
    inst = gen_smoothed("knapsack", n, 2.0, np.random.default_rng(seed))
    opt = brute_force_knapsack(inst)
    assert knapsack_greedy(inst, 1.0)[1] >= opt / 2 * (1 - 1e-12)
    if n <= 10:
        assert opt == pytest.approx(subsets_knapsack(inst), rel=1e-12)


@given(st.integers(0, 10**6), st.integers(2, 12))
def test_knapsack_breakpoints_at_most_n_squared(seed, n):
    inst = gen_smoothed("knapsack", n, 2.0, np.random.default_rng(seed))
    assert len(knapsack_curve(inst, 50.0, merge=False).fn.breakpoints) <= n * n


# --- MWIS ---------------------------------------------------------------------


def test_mwis_examples():
    edgeless = MwisInstance([0.2, 0.3, 0.4], np.zeros((3, 3)))
    assert mwis_greedy(edgeless, 2.0) == ({0, 1, 2}, pytest.approx(0.9))
    assert mwis_greedy(PATH, 0.0) == ({1}, 0.9)
    assert mwis_greedy(PATH, 1.0) == ({0, 2}, pytest.approx(1.2))
    assert mwis_greedy(MwisInstance([0.7], np.zeros((1, 1))), 1.0) == ({0}, 0.7)
    assert brute_force_mwis(PATH) == pytest.approx(1.2)
    full = np.ones((4, 4)) - np.eye(4)
    assert brute_force_mwis(MwisInstance([0.1, 0.8, 0.3, 0.2], full)) == 0.8


def test_mwis_curves():
    edgeless = MwisInstance([0.2, 0.3, 0.4], np.zeros((3, 3)))
    c = mwis_curve(edgeless)
    assert c.fn.n_pieces == 1 and c(5.0) == pytest.approx(0.9)
    c = mwis_curve(PATH, 3.0)
    # scores cross where 0.9 / 3**r = 0.6 / 2**r, i.e. at r = 1
    cross = 1.0
    assert c(0.0) == 0.9 and c(2.0) == pytest.approx(1.2)
    assert len(c.fn.breakpoints) == 1 and abs(c.fn.breakpoints[0] - cross) < 1e-12


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.integers(2, 8), st.booleans())
def test_mwis_curve_matches_grid(seed, n, residual):
    inst = gen_smoothed("mwis", n, 3.0, np.random.default_rng(seed), p=0.4)
    c = mwis_curve(inst, 10.0, residual=residual)
    grid = np.linspace(0, 10, 1000, endpoint=False)
    direct = np.array([mwis_greedy(inst, r, residual)[1] for r in grid])
    assert np.array_equal(pw.evaluate(c.fn, grid), direct)
    assert np.array_equal(mwis_values(inst, grid, residual), direct)


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 11))
def test_mwis_degree_bound(seed, n):
    inst = gen_smoothed("mwis", n, 2.0, np.random.default_rng(seed), p=0.4)
    opt = brute_force_mwis(inst)
    D = max(inst.max_degree, 1)
    assert mwis_greedy(inst, 1.0)[1] >= opt / D * (1 - 1e-12)
    assert opt == pytest.approx(subsets_mwis(inst), rel=1e-12)


@given(st.integers(0, 10**6), st.integers(2, 9))
def test_mwis_candidates_at_most_n4(seed, n):
    inst = gen_smoothed("mwis", n, 2.0, np.random.default_rng(seed))
    assert len(mwis_candidates(inst, 1e9)) <= n**4


def test_brute_force_limits():
    rng = np.random.default_rng(0)
    with pytest.raises(TooLarge):
        brute_force_knapsack(gen_smoothed("knapsack", 23, 2.0, rng))
    with pytest.raises(TooLarge):
        brute_force_mwis(gen_smoothed("mwis", 19, 2.0, rng))


# --- generators and files -------------------------------------------------------


def test_kappa_one_is_uniform():
    rng = np.random.default_rng(1)
    vals = np.concatenate([gen_smoothed("knapsack", 50, 1.0, rng).values for _ in range(200)])
    assert vals.min() > 0 and vals.max() <= 1
    from scipy import stats
    assert stats.kstest(vals, "uniform").pvalue > 1e-3


def test_density_is_kappa_bounded():
    kappa = 4.0
    rng = np.random.default_rng(2)
    vals = np.concatenate([gen_smoothed("knapsack", 100, kappa, rng, anchors=np.full(100, 0.3)).values
                           for _ in range(1000)])
    hist, _ = np.histogram(vals, bins=200, range=(0, 1), density=True)
    assert hist.max() <= kappa * 1.1
    assert vals.min() > 0.3 and vals.max() <= 0.3 + 1 / kappa


def test_gen_rejects_small_kappa():
    with pytest.raises(BadKappa):
        gen_smoothed("knapsack", 3, 0.5, np.random.default_rng(0))
    with pytest.raises(BadKappa):
        tiered_knapsack(10, 1.5, np.random.default_rng(0))


def test_tiered_layout():
    inst = tiered_knapsack(10, 4.0, np.random.default_rng(3))
    assert inst.n == 10 and np.all(inst.sizes >= 1)
    assert 3.7 <= inst.sizes[0] <= 3.9
    assert np.all(inst.values[4:] <= 0.5)


@pytest.mark.parametrize("family", ["knapsack", "mwis"])
def test_json_round_trip(family):
    inst = gen_smoothed(family, 7, 2.0, np.random.default_rng(4))
    back = instance_from_json(instance_to_json(inst))
    grid = np.linspace(0, 10, 200)
    if family == "knapsack":
        assert np.array_equal(knapsack_values(inst, grid), knapsack_values(back, grid))
    else:
        assert np.array_equal(back.adj, inst.adj)
        assert np.array_equal(back.weights, inst.weights)


def test_invalid_instances():
    with pytest.raises(ValueError):
        KnapsackInstance([1.5], [1], 1)
    with pytest.raises(ValueError):
        KnapsackInstance([0.5], [0.5], 1)
    with pytest.raises(ValueError):
        MwisInstance([0.5, 0.5], [[0, 1], [0, 0]])
