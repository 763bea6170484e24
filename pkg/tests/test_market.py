import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersed import piecewise as pw
from dispersed.errors import BadParams, NonAdditive, PriceCountMismatch, UnsupportedCombination
from dispersed.market import (
    ValuationProfile,
    additive_breakpoints,
    curve_1d,
    gen_valuations,
    posted_price_run,
    second_price_run,
)
from dispersed.piecewise import Constant


def additive(rows, W=1.0):
    rows = np.asarray(rows, dtype=float)
    return ValuationProfile("additive", rows.shape[1], rows, W)


# --- posted prices ------------------------------------------------------------


def test_prices_above_all_values_sell_nothing():
    out = posted_price_run(additive([[0.3, 0.9], [0.5, 0.2]]), [1.5, 1.5])
    assert out.revenue == 0 and out.welfare == 0
    assert np.all(out.allocation == -1)


def test_posted_price_hand_trace():
    out = posted_price_run(additive([[0.6, 0.4], [0.7, 0.9]]), [0.5, 0.5], ordering=[0, 1])
    assert list(out.allocation) == [0, 1]
    assert out.revenue == 1.0 and out.welfare == pytest.approx(1.5)


def test_weak_inequality_at_price_equal_value():
    out = posted_price_run(additive([[0.4]]), [0.4])
    assert out.allocation[0] == 0 and out.revenue == 0.4


def test_general_buyer_matches_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(50):
        prof = gen_valuations("general", 1, 2, 2.0, 1.0, rng)
        p = rng.random(2)
        out = posted_price_run(prof, p)
        utils = {b: prof.bundle_value(0, b) - sum(p[list(b)])
                 for b in [(), (0,), (1,), (0, 1)]}
        best = max(utils.values())
        assert utils[out.bundles[0]] == pytest.approx(best)


def test_unit_demand_takes_one_item():
    prof = ValuationProfile("unit_demand", 3, [[0.9, 0.8, 0.2]])
    out = posted_price_run(prof, [0.5, 0.1, 0.0])
    # utilities 0.4, 0.7, 0.2: one item only
    assert out.bundles[0] == (1,)


def test_price_count_and_ordering_checks():
    prof = additive([[0.3, 0.4]])
    with pytest.raises(PriceCountMismatch):
        posted_price_run(prof, [0.1])
    with pytest.raises(ValueError):
        posted_price_run(prof, [0.1, 0.2], ordering=[1])


# --- second price ----------------------------------------------------------------


def test_second_price_examples():
    prof = additive([[0.5], [0.8]])
    out = second_price_run(prof, [0.6])
    assert out.allocation[0] == 1 and out.revenue == 0.6 and out.welfare == 0.8
    assert second_price_run(prof, [0.9]).revenue == 0
    assert second_price_run(prof, [0.0]).revenue == 0.5
    assert second_price_run(additive([[0.7]]), [0.0]).revenue == 0.0


def test_second_price_needs_additive():
    with pytest.raises(NonAdditive):
        second_price_run(ValuationProfile("unit_demand", 1, [[0.5]]), [0.1])


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_winner_payment_independent_of_own_bid(seed):
    rng = np.random.default_rng(seed)
    prof = gen_valuations("additive", 4, 3, 2.0, 1.0, rng)
    r = rng.random(3) * 0.5
    out = second_price_run(prof, r)
    for i in range(3):
        j = out.allocation[i]
        if j < 0:
            continue
        vals = prof.values.copy()
        vals[j, i] += rng.random()
        raised = second_price_run(additive(vals, prof.W), r)
        assert raised.allocation[i] == j
        assert raised.payments[j] == out.payments[j]


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from(["additive", "unit_demand", "general"]))
def test_revenue_at_most_welfare(seed, model):
    rng = np.random.default_rng(seed)
    prof = gen_valuations(model, 3, 3, 2.0, 1.0, rng)
    p = rng.random(3)
    assert posted_price_run(prof, p).revenue <= posted_price_run(prof, p).welfare + 1e-12
    if model == "additive":
        out = second_price_run(prof, p)
        assert out.revenue <= out.welfare + 1e-12


# --- curves ----------------------------------------------------------------------


def test_single_buyer_curves():
    v = 0.6
    prof = additive([[v]])
    wel = curve_1d(prof, which="welfare", axis=0)
    rev = curve_1d(prof, which="revenue", axis=0)
    for rho in (0.0, 0.3, v, 0.61, 0.99):
        assert wel(rho) == (v if rho <= v else 0.0)
        assert rev(rho) == pytest.approx(rho if rho <= v else 0.0, abs=1e-15)


def test_no_buyers_is_constant_zero():
    prof = ValuationProfile("additive", 2, np.zeros((0, 2)))
    c = curve_1d(prof)
    assert c.fn.n_pieces == 1 and c(0.5) == 0.0


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(["posted_price", "second_price"]),
       st.sampled_from(["revenue", "welfare"]), st.integers(1, 3))
def test_curve_matches_simulator(seed, mech, which, m):
    rng = np.random.default_rng(seed)
    prof = gen_valuations("additive", 4, m, 2.0, 1.0, rng)
    axis = 0 if m == 1 else "uniform"
    c = curve_1d(prof, mech, which, axis=axis)
    run = posted_price_run if mech == "posted_price" else second_price_run
    grid = np.concatenate((np.linspace(0, 1, 1000, endpoint=False), prof.values.ravel()))
    sim = np.array([run(prof, np.full(m, r)).utility(which) for r in grid])
    got = pw.evaluate(c.fn, grid)
    if m == 1:
        assert np.array_equal(got, sim)
    else:
        assert np.allclose(got, sim, rtol=0, atol=1e-15)


@given(st.integers(0, 10**6))
def test_curve_piece_shapes(seed):
    rng = np.random.default_rng(seed)
    prof = gen_valuations("additive", 5, 3, 2.0, 1.0, rng)
    wel = curve_1d(prof, which="welfare")
    assert all(isinstance(p.form, Constant) for p in wel.fn.pieces)
    rev = curve_1d(prof, which="revenue")
    assert set(np.unique(rev.fn.slopes)) <= set(range(4))


def test_curve_rejects_unsupported():
    with pytest.raises(UnsupportedCombination):
        curve_1d(ValuationProfile("unit_demand", 1, [[0.5]]))
    with pytest.raises(UnsupportedCombination):
        curve_1d(additive([[0.5]]), mechanism="vcg")


def test_additive_breakpoints():
    axes = additive_breakpoints([additive([[0.3, 0.7]])])
    assert [a.tolist() for a in axes] == [[0.3], [0.7]]
    assert additive_breakpoints([]) == []
    rng = np.random.default_rng(1)
    profs = [gen_valuations("additive", 4, 2, 2.0, 1.0, rng) for _ in range(5)]
    assert all(len(a) == 20 for a in additive_breakpoints(profs))
    with pytest.raises(NonAdditive):
        additive_breakpoints([ValuationProfile("unit_demand", 1, [[0.5]])])


# --- generators --------------------------------------------------------------------


def test_full_window_is_uniform():
    from scipy import stats
    prof = gen_valuations("additive", 2000, 5, 0.5, 2.0, np.random.default_rng(2))
    assert stats.kstest(prof.values.ravel(), stats.uniform(0, 2).cdf).pvalue > 1e-3


@pytest.mark.parametrize("model", ["additive", "unit_demand"])
def test_generated_density_is_bounded(model):
    kappa, W = 3.0, 1.0
    rng = np.random.default_rng(3)
    # one buyer, one item, many draws: the marginal of a single coordinate
    vals = np.array([gen_valuations(model, 1, 1, kappa, W, rng).values[0, 0] for _ in range(20_000)])
    assert vals.min() >= 0 and vals.max() <= W
    if model == "additive":
        hist, _ = np.histogram(vals, bins=50, range=(0, W), density=True)
        assert hist.max() <= kappa * 1.1


def test_general_profile_shape():
    prof = gen_valuations("general", 2, 3, 2.0, 1.0, np.random.default_rng(4))
    assert prof.values.shape == (2, 8)
    assert np.all(prof.values[:, 0] == 0)
    for a, b in itertools.product(range(8), repeat=2):
        if a & b == a:
            assert np.all(prof.values[:, b] >= prof.values[:, a])


def test_profile_validation_and_json():
    with pytest.raises(BadParams):
        gen_valuations("additive", 2, 2, 0.5, 1.0, np.random.default_rng(0))
    with pytest.raises(BadParams):
        ValuationProfile("general", 1, [[0.1, 0.5]])
    with pytest.raises(BadParams):
        ValuationProfile("general", 1, [[0.0, 0.5, 0.4, 0.3]])
    with pytest.raises(BadParams):
        ValuationProfile("additive", 1, [[-0.1]])
    prof = gen_valuations("general", 2, 2, 2.0, 1.0, np.random.default_rng(5))
    back = ValuationProfile.from_json(prof.to_json())
    assert np.array_equal(back.values, prof.values) and back.model == "general"
