"""Online learners: the exact 1-d exponentially weighted forecaster (EWF),
its private parameterisation, Exp3 over a w-net, and regret accounting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import piecewise as pw
from .errors import (
    BadGeometry,
    BadPrivacyParams,
    DomainMismatch,
    LengthMismatch,
    NetTooLarge,
    PayoffOutOfRange,
    RangeViolation,
)
from .piecewise import PiecewiseFn1D, UtilityCurve

__all__ = [
    "LearnerState",
    "BanditState",
    "RegretLedger",
    "lambda_full_info",
    "lambda_private",
    "ewf_init",
    "ewf_play",
    "ewf_update",
    "ewf_expected_payoff",
    "run_ewf",
    "build_net",
    "exp3_init",
    "exp3_round",
    "exp3_distribution",
    "run_exp3",
    "compute_regret",
    "weight_ratio_check",
]


def lambda_full_info(d: int, R: float, w: float, T: int, H: float) -> float:
    if not R > w > 0:
        raise BadGeometry(f"need R > w > 0, got R={R}, w={w}")
    if T < 1 or H <= 0:
        raise ValueError("need T >= 1 and H > 0")
    return math.sqrt(d * math.log(R / w) / T) / H


def lambda_private(eps: float, delta: float, T: int, H: float) -> float:
    if not (0 < eps <= 1 and 0 < delta < 1):
        raise BadPrivacyParams(f"need eps in (0, 1] and delta in (0, 1), got {eps}, {delta}")
    if T < 1 or H <= 0:
        raise ValueError("need T >= 1 and H > 0")
    return eps / (4.0 * H * math.sqrt(2.0 * T * math.log(1.0 / delta)))


@dataclass
class LearnerState:
    """Mutable state of one forecaster.

    ``cum`` holds the unscaled running sum of observed curves; ``lam`` is
    applied only when sampling.
    """

    domain: tuple[float, float]
    lam: float
    h_bound: float
    cum: PiecewiseFn1D
    rng: np.random.Generator
    t: int = 0


def ewf_init(domain, lam: float, h_bound: float, rng) -> LearnerState:
    if not 0 < lam <= 1.0 / h_bound * (1 + 1e-12):
        raise ValueError(f"lam must lie in (0, 1/H], got {lam}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    lo, hi = float(domain[0]), float(domain[1])
    return LearnerState((lo, hi), lam, float(h_bound), pw.constant(0.0, (lo, hi)), rng)


def ewf_play(state: LearnerState) -> float:
    """Draw rho_t with density proportional to exp(lam * U_t)."""
    return pw.sample_exp(state.cum, state.lam, state.rng)


def _check_curve(state_domain, h_bound, curve):
    fn = curve.fn if isinstance(curve, UtilityCurve) else curve
    if (fn.lo, fn.hi) != tuple(state_domain):
        raise DomainMismatch(f"curve domain {(fn.lo, fn.hi)} != {tuple(state_domain)}")
    lo, hi = fn.value_range()
    slack = 1e-9 * max(1.0, h_bound)
    if lo < -slack or hi > h_bound + slack:
        raise RangeViolation(f"curve values [{lo}, {hi}] leave [0, {h_bound}]")
    return fn


def ewf_update(state: LearnerState, curve) -> LearnerState:
    fn = _check_curve(state.domain, state.h_bound, curve)
    state.cum = pw.sum_fns([state.cum, fn])
    state.t += 1
    return state


def ewf_expected_payoff(state: LearnerState, curve) -> float:
    """E[u(rho)] for rho drawn from the forecaster's current distribution.

    Exact for piecewise-constant ``curve``; affine pieces are integrated with
    8-point Gauss-Legendre per refined piece.
    """
    fn = curve.fn if isinstance(curve, UtilityCurve) else curve
    bps, sl, ic = pw.refine([state.cum, fn])
    edges = np.concatenate(([fn.lo], bps, [fn.hi]))
    lm = pw._log_mass(edges[:-1], edges[1:], sl[0], ic[0], state.lam)
    wts = np.exp(lm - lm.max())
    wts /= wts.sum()
    if np.all(sl[1] == 0.0):
        return float(np.dot(wts, ic[1]))
    # mean of rho under exp(c * rho) on each piece, then E[a rho + b]
    c = state.lam * sl[0]
    lo, hi = edges[:-1], edges[1:]
    x, gw = np.polynomial.legendre.leggauss(8)
    mids, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mids[:, None] + half[:, None] * x[None, :]
    logd = c[:, None] * (pts - mids[:, None])
    dens = np.exp(logd - logd.max(axis=1, keepdims=True)) * gw[None, :]
    mean_rho = (dens * pts).sum(axis=1) / dens.sum(axis=1)
    return float(np.dot(wts, sl[1] * mean_rho + ic[1]))


def run_ewf(curves: Sequence, lam: float, h_bound: float, rng, domain=None):
    """Play the forecaster against a fixed stream; returns (plays, expected payoffs)."""
    if domain is None:
        fn0 = curves[0].fn if isinstance(curves[0], UtilityCurve) else curves[0]
        domain = fn0.domain
    state = ewf_init(domain, lam, h_bound, rng)
    plays, expected = [], []
    for c in curves:
        plays.append(ewf_play(state))
        expected.append(ewf_expected_payoff(state, c))
        ewf_update(state, c)
    return np.array(plays), np.array(expected), state


# --- nets and Exp3 -------------------------------------------------------


def build_net(box, w: float, cap: int = 10**6, ball_radius: float | None = None) -> np.ndarray:
    """Axis-aligned grid whose points are within l2 distance ``w`` of every domain point.

    ``box`` is a sequence of ``(lo, hi)`` per axis.  Per-axis spacing is at
    most ``2 w / sqrt(d)`` and points sit at cell centres.  With
    ``ball_radius`` the domain is the ball of that radius about the origin
    (``box`` should then be its bounding box) and cells that cannot reach the
    ball are dropped.  Returns an array of shape ``(count, d)``.
    """
    if w <= 0:
        raise ValueError("w must be positive")
    box = [(float(a), float(b)) for a, b in box]
    d = len(box)
    spacing = 2.0 * w / math.sqrt(d)
    counts = [max(1, math.ceil((b - a) / spacing - 1e-12)) for a, b in box]
    total = math.prod(counts)
    if total > cap:
        raise NetTooLarge(f"net would have {total} points (cap {cap})")
    axes = [a + (np.arange(k) + 0.5) * ((b - a) / k) for (a, b), k in zip(box, counts)]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, d)
    if ball_radius is not None:
        pts = pts[np.linalg.norm(pts, axis=1) <= ball_radius + w]
    return pts


@dataclass
class BanditState:
    arms: np.ndarray
    log_weights: np.ndarray
    eta: float
    gamma: float
    h_bound: float
    rng: np.random.Generator
    t: int = 0

    @property
    def weights(self) -> np.ndarray:
        lw = self.log_weights
        return np.exp(lw - lw.max())


def exp3_init(arms, T: int, h_bound: float, rng, eta=None, gamma=None) -> BanditState:
    """Exp3 with the textbook defaults eta = sqrt(ln K / (T K)) and
    gamma = min(1, sqrt(K ln K / ((e - 1) T)))."""
    arms = np.asarray(arms, dtype=float)
    K = len(arms)
    if K == 0:
        raise ValueError("need at least one arm")
    if eta is None:
        eta = math.sqrt(math.log(K) / (T * K))
    if gamma is None:
        gamma = min(1.0, math.sqrt(K * math.log(K) / ((math.e - 1.0) * T)))
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return BanditState(arms, np.zeros(K), float(eta), float(gamma), float(h_bound), rng)


def exp3_distribution(b: BanditState) -> np.ndarray:
    w = b.weights
    K = len(w)
    return (1.0 - b.gamma) * w / w.sum() + b.gamma / K


def exp3_round(b: BanditState, payoff_oracle: Callable):
    """One Exp3 round.

    ``payoff_oracle(arm_point)`` returns the payoff in ``[0, H]`` of the
    chosen arm only.  Returns ``(arm_index, payoff, b)``.
    """
    p = exp3_distribution(b)
    cdf = np.cumsum(p)
    i = int(min(np.searchsorted(cdf, b.rng.random() * cdf[-1], side="right"), len(p) - 1))
    x = float(payoff_oracle(b.arms[i]))
    if x < -1e-12 or x > b.h_bound * (1 + 1e-12):
        raise PayoffOutOfRange(f"payoff {x} outside [0, {b.h_bound}]")
    xhat = (x / b.h_bound) / p[i]
    b.log_weights[i] += b.eta * xhat
    b.log_weights -= b.log_weights.max()
    b.t += 1
    return i, x, b


def run_exp3(curves: Sequence, arms, h_bound: float, rng, eta=None, gamma=None):
    """Exp3 over ``arms`` against a fixed stream of 1-d curves.

    Returns ``(arm indices, realised payoffs, payoff matrix)`` where the
    matrix holds every arm's payoff per round (used only for regret).
    """
    arms = np.asarray(arms, dtype=float).reshape(-1)
    b = exp3_init(arms, len(curves), h_bound, rng, eta, gamma)
    table = np.array([pw.evaluate(c.fn if isinstance(c, UtilityCurve) else c, arms) for c in curves])
    arm_index = {float(a): k for k, a in enumerate(arms)}
    chosen, paid = [], []
    for row in table:
        i, x, b = exp3_round(b, lambda pt: row[arm_index[float(pt)]])
        chosen.append(i)
        paid.append(x)
    return np.array(chosen, dtype=int), np.array(paid), table


# --- regret ----------------------------------------------------------------


@dataclass
class RegretLedger:
    plays: np.ndarray
    realized: np.ndarray
    opt: float
    opt_rho: float
    cum_regret: np.ndarray = field(repr=False)

    @property
    def regret(self) -> float:
        return float(self.opt - self.realized.sum())

    @property
    def T(self) -> int:
        return len(self.plays)


def compute_regret(curves: Sequence, plays: Sequence[float], prefix: bool = True) -> RegretLedger:
    """Hindsight regret of ``plays`` against ``curves``.

    With ``prefix`` the per-round column is ``OPT_t - sum_{s<=t} u_s(rho_s)``
    where ``OPT_t`` is the best fixed parameter for the first ``t`` curves;
    otherwise every row uses the final ``OPT``.
    """
    if len(curves) != len(plays):
        raise LengthMismatch(f"{len(curves)} curves but {len(plays)} plays")
    fns = [c.fn if isinstance(c, UtilityCurve) else c for c in curves]
    plays = np.asarray(plays, dtype=float)
    realized = np.array([pw.evaluate(f, r) for f, r in zip(fns, plays)])
    if not fns:
        return RegretLedger(plays, realized, 0.0, float("nan"), np.empty(0))
    total = pw.sum_fns(fns)
    opt_rho, opt = pw.argmax(total)
    if prefix:
        cum = np.empty(len(fns))
        run = fns[0]
        for t in range(len(fns)):
            if t:
                run = pw.sum_fns([run, fns[t]])
            cum[t] = pw.argmax(run)[1]
        cum_regret = cum - np.cumsum(realized)
    else:
        cum_regret = opt - np.cumsum(realized)
    return RegretLedger(plays, realized, opt, opt_rho, cum_regret)


def weight_ratio_check(curves: Sequence, lam: float, h_bound: float, profile,
                       L: float = 0.0, d: int = 1, slack: float = 1e-6):
    """Check ln(W_{T+1}/W_1) >= lam (OPT - H k - L T w) + d ln(w / R) for each (w, k).

    ``W_t`` integrates ``exp(lam * U_t)`` over the domain.  In 1-d, ``R`` is
    the domain length: the domain sits in a radius-``R`` ball about either end
    and any radius-``w`` ball about a maximiser keeps length >= ``w`` inside
    the domain.  Returns a list of ``(w, k, lhs, rhs, ok)``.
    """
    fns = [c.fn if isinstance(c, UtilityCurve) else c for c in curves]
    total = pw.sum_fns(fns)
    R = total.hi - total.lo
    log_w1 = math.log(R)
    log_wT = pw.log_exp_integral(total, lam)
    opt = pw.argmax(total)[1]
    T = len(fns)
    lhs = log_wT - log_w1
    rows = []
    for w, k in profile.pairs():
        if w >= R:
            continue
        rhs = lam * (opt - h_bound * k - L * T * w) + d * math.log(w / R)
        rows.append((w, k, lhs, rhs, lhs >= rhs - slack))
    return rows
