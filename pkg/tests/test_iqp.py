import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dispersed import piecewise as pw
from dispersed.errors import DegenerateZ, NonPositiveS, NonSymmetric, TooLarge
from dispersed.iqp import (
    Embedding,
    IqpInstance,
    brute_force_iqp,
    gen_maxcut,
    maxcut_matrix,
    owr_breakpoints,
    owr_curve,
    owr_raw_breakpoints,
    phi,
    sdp_embed,
    slin_breakpoints,
    slin_lipschitz_report,
    slin_search_bound,
    uowr_value,
    uslin_grid,
    uslin_value,
)

EDGE = maxcut_matrix([[0, 1], [1, 0]])


def enum_iqp(A):
    n = len(A)
    return max(np.array(z) @ A @ np.array(z) for z in itertools.product((-1.0, 1.0), repeat=n))


def random_setup(seed, n=6):
    rng = np.random.default_rng(seed)
    inst = gen_maxcut(n, rng)
    emb = sdp_embed(inst.A, rng=rng)
    return inst.A, emb, rng


# --- instances and SDP ------------------------------------------------------------


def test_instance_validation():
    with pytest.raises(NonSymmetric):
        IqpInstance(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        IqpInstance(np.array([[-1.0]]))
    inst = gen_maxcut(5, np.random.default_rng(0))
    assert inst.abs_mass == pytest.approx(1.0)
    back = IqpInstance.from_json(inst.to_json())
    assert np.array_equal(back.A, inst.A)


def test_maxcut_matrix_counts_cut_weight():
    W = np.random.default_rng(1).random((5, 5))
    W = np.triu(W, 1) + np.triu(W, 1).T
    A = maxcut_matrix(W, normalize=False)
    for z in itertools.product((-1.0, 1.0), repeat=5):
        z = np.array(z)
        cut = sum(W[i, j] for i in range(5) for j in range(i + 1, 5) if z[i] != z[j])
        assert z @ A @ z == pytest.approx(cut)


def test_sdp_single_edge_is_antipodal():
    emb = sdp_embed(EDGE, rank=2, rng=np.random.default_rng(0))
    assert emb.U[0] @ emb.U[1] == pytest.approx(-1.0, abs=1e-3)


def test_sdp_diagonal_objective():
    A = np.diag([0.2, 0.5, 0.3])
    emb = sdp_embed(A, rng=np.random.default_rng(1))
    assert emb.sdp_objective == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(emb.U, axis=1), 1.0, atol=1e-8)


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_sdp_dominates_random_signs(seed):
    A, emb, rng = random_setup(seed, 8)
    best = max(float(z @ A @ z) for z in rng.choice([-1.0, 1.0], size=(200, 8)))
    # the ascent stops on a relative-improvement tolerance, so it may sit a
    # hair below the true relaxation value
    assert emb.sdp_objective >= best * (1 - 1e-6)
    assert emb.sdp_objective == pytest.approx(float(np.sum(A * (emb.U @ emb.U.T))))


def test_sdp_rejects_low_rank_and_asymmetry():
    with pytest.raises(ValueError):
        sdp_embed(EDGE, rank=1)
    with pytest.raises(NonSymmetric):
        sdp_embed(np.array([[0.0, 1.0], [0.5, 0.0]]))


# --- outward rotation ----------------------------------------------------------------


def test_uowr_end_points():
    A, emb, rng = random_setup(2)
    n = len(A)
    Z = rng.standard_normal(2 * n)
    z = np.where(Z[n:] >= 0, 1.0, -1.0)
    assert uowr_value(A, emb, Z, math.pi / 2) == pytest.approx(z @ A @ z, abs=1e-15)
    g = np.where(emb.U @ Z[: emb.rank] >= 0, 1.0, -1.0)
    assert uowr_value(A, emb, Z, 0.0) == pytest.approx(g @ A @ g, abs=1e-15)


@given(st.integers(0, 10**6), st.floats(0, math.pi / 2))
def test_uowr_matches_direct_formula(seed, gamma):
    A, emb, rng = random_setup(seed % 50, 5)
    Z = np.random.default_rng(seed).standard_normal(10)
    v = np.cos(gamma) * (emb.U @ Z[:5]) + np.sin(gamma) * Z[5:]
    z = np.where(v >= 0, 1.0, -1.0)
    direct = sum(A[i, j] * z[i] * z[j] for i in range(5) for j in range(5))
    assert uowr_value(A, emb, Z, gamma) == pytest.approx(direct, abs=1e-14)


def test_owr_single_vertex_has_at_most_one_breakpoint():
    emb = Embedding(np.array([[1.0]]), 0.0)
    for seed in range(20):
        Z = np.random.default_rng(seed).standard_normal(2)
        assert len(owr_breakpoints(emb, Z)) <= 1


def test_owr_degenerate_z():
    A, emb, _ = random_setup(3, 3)
    with pytest.raises(DegenerateZ):
        owr_raw_breakpoints(emb, np.array([1.0, 1.0, 1.0, 0.5, 0.0, 0.5]))


def test_owr_raw_breakpoints_are_uniform():
    emb = Embedding(np.array([[1.0]]), 0.0)
    rng = np.random.default_rng(4)
    raw = np.array([owr_raw_breakpoints(emb, rng.standard_normal(2))[0] for _ in range(10_000)])
    assert stats.kstest(raw, stats.uniform(-math.pi / 2, math.pi).cdf).pvalue > 0.01


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_owr_curve_matches_grid(seed):
    A, emb, rng = random_setup(seed % 40, 7)
    Z = rng.standard_normal(14)
    c = owr_curve(A, emb, Z)
    grid = np.linspace(0, math.pi / 2, 1000)
    direct = np.array([uowr_value(A, emb, Z, g) for g in grid])
    assert np.array_equal(pw.evaluate(c.fn, grid), direct)


# --- s-linear -------------------------------------------------------------------------


def test_phi():
    assert np.allclose(phi([-2.0, -0.5, 0.0, 0.25, 3.0], 1.0), [-1, -0.5, 0, 0.25, 1])
    with pytest.raises(NonPositiveS):
        phi(0.3, 0.0)


def test_uslin_small_s_is_sign_rounding():
    A, emb, rng = random_setup(5)
    Z = rng.standard_normal(emb.rank)
    v = emb.U @ Z
    s = 0.5 * np.abs(v).min()
    z = np.where(v >= 0, 1.0, -1.0)
    assert uslin_value(A, emb, Z, s) == pytest.approx(z @ A @ z, abs=1e-15)
    # constant below the smallest breakpoint
    assert uslin_value(A, emb, Z, s / 3) == uslin_value(A, emb, Z, s)


def test_uslin_diagonal_matrix():
    A = np.diag([0.1, 0.4, 0.5])
    emb = sdp_embed(A, rng=np.random.default_rng(6))
    Z = np.random.default_rng(7).standard_normal(3)
    for s in (0.01, 0.5, 5.0):
        assert uslin_value(A, emb, Z, s) == pytest.approx(1.0)


def test_uslin_sampled_mean():
    A, emb, rng = random_setup(8)
    Z = rng.standard_normal(emb.rank)
    s = float(np.median(np.abs(emb.U @ Z)))
    draws = np.array([uslin_value(A, emb, Z, s, "sampled", rng) for _ in range(20_000)])
    se = draws.std(ddof=1) / math.sqrt(len(draws))
    assert abs(draws.mean() - uslin_value(A, emb, Z, s)) <= 3 * se + 1e-12


def test_uslin_grid_matches_pointwise():
    A, emb, rng = random_setup(9)
    Z = rng.standard_normal(emb.rank)
    grid = np.linspace(0.05, 3, 40)
    want = [uslin_value(A, emb, Z, s) for s in grid]
    assert np.allclose(uslin_grid(A, emb, Z, grid), want, atol=1e-14)


def test_slin_breakpoints():
    emb = Embedding(np.array([[1.0, 0.0]]), 0.0)
    assert np.allclose(slin_breakpoints(emb, [-0.7, 2.0], 1.0), [0.7])
    assert len(slin_breakpoints(emb, [-0.7, 2.0], 0.5)) == 0
    A, emb, rng = random_setup(10, 9)
    assert len(slin_breakpoints(emb, rng.standard_normal(9), 10.0)) <= 9


def test_slin_breakpoint_density():
    emb = Embedding(np.array([[1.0, 0.0]]), 0.0)
    rng = np.random.default_rng(11)
    bps = np.concatenate([slin_breakpoints(emb, rng.standard_normal(2), 50.0) for _ in range(100_000)])
    hist, _ = np.histogram(bps, bins=40, range=(0, 2), density=False)
    dens = hist / (len(bps) * 0.05)
    assert dens.max() <= math.sqrt(2 / math.pi) * 1.1


def test_slin_search_bound():
    z = 2 * math.sqrt(8 / math.pi) / math.e
    assert slin_search_bound(1, 1, z) == pytest.approx(math.sqrt(2))
    assert slin_search_bound(20, 200, 0.05) > slin_search_bound(20, 100, 0.05)
    assert slin_lipschitz_report(1.0, 2, 1, 0.5) == 64.0


# --- oracle ------------------------------------------------------------------------


def test_brute_force_examples():
    assert brute_force_iqp(np.diag([0.3, 0.2])) == pytest.approx(0.5)
    assert brute_force_iqp(maxcut_matrix([[0, 1], [1, 0]], normalize=False)) == pytest.approx(1.0)
    assert brute_force_iqp(np.zeros((4, 4))) == 0.0
    with pytest.raises(TooLarge):
        brute_force_iqp(np.zeros((19, 19)))


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.integers(1, 9))
def test_brute_force_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    A = (M + M.T) / 2
    np.fill_diagonal(A, np.abs(np.diag(A)))
    assert brute_force_iqp(A) == pytest.approx(enum_iqp(A), abs=1e-12)
