"""Exponential mechanism for private parameter selection.

The 1-d mechanism samples rho with density proportional to
``exp(eps / (2 H) * sum_i u_i(rho))``; that exponent uses the total utility,
which equals ``eps * n / (2 H)`` times the average utility, i.e. sensitivity
``H / n`` for the average.
"""
from __future__ import annotations

import math
from collections import Counter
from typing import Callable, Sequence

import numpy as np

from . import piecewise as pw
from .errors import BadGeometry, DomainMismatch, EmptyNet, NotNeighbors
from .piecewise import PiecewiseFn1D, UtilityCurve

__all__ = [
    "exp_mech_1d",
    "exp_mech_grid",
    "grid_probabilities",
    "utility_bound",
    "density_log_ratio",
    "privacy_ratio_check",
]


def _fns(curves):
    return [c.fn if isinstance(c, UtilityCurve) else c for c in curves]


def exp_mech_1d(curves: Sequence, eps: float, H: float, rng, size=None):
    """Exact sample(s) from the exponential mechanism over the curves' domain."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    total = pw.sum_fns(_fns(curves))
    return pw.sample_exp(total, eps / (2.0 * H), rng, size=size)


def grid_probabilities(avg_utilities, eps: float, H: float, n: int) -> np.ndarray:
    u = np.asarray(avg_utilities, dtype=float)
    if len(u) == 0:
        raise EmptyNet("net is empty")
    logits = eps * n / (2.0 * H) * u
    p = np.exp(logits - logits.max())
    return p / p.sum()


def exp_mech_grid(utility: Callable, net, eps: float, H: float, n: int, rng, size=None):
    """Finite exponential mechanism over ``net`` with sensitivity ``H / n``.

    ``utility(point)`` returns the average utility of a net point.  Returns
    the chosen point (or an array of ``size`` points).
    """
    net = np.asarray(net, dtype=float)
    if len(net) == 0:
        raise EmptyNet("net is empty")
    p = grid_probabilities([utility(x) for x in net], eps, H, n)
    idx = rng.choice(len(net), size=size, p=p)
    return net[idx]


def utility_bound(eps, zeta, H, d, R, w, k, L, n) -> float:
    """Suboptimality (average utility) that holds with probability 1 - zeta:
    ``2H/(n eps) (d ln(R/w) + ln(1/zeta)) + L w + H k / n``."""
    if not R > w > 0:
        raise BadGeometry(f"need R > w > 0, got R={R}, w={w}")
    return (2.0 * H / (n * eps)) * (d * math.log(R / w) + math.log(1.0 / zeta)) + L * w + H * k / n


def _key(f: PiecewiseFn1D):
    return (f.lo, f.hi, f.breakpoints.tobytes(), f.slopes.tobytes(), f.intercepts.tobytes())


def density_log_ratio(f_a: PiecewiseFn1D, f_b: PiecewiseFn1D, lam: float) -> float:
    """sup over measurable events O of |ln P_a(O) / P_b(O)|.

    ``P_x`` has density proportional to ``exp(lam * f_x)``.  On each piece of
    the common refinement the log density ratio is affine, so the supremum is
    attained at a piece end; it also dominates every piece-level ratio, which
    is computed as well for reporting.
    """
    if (f_a.lo, f_a.hi) != (f_b.lo, f_b.hi):
        raise DomainMismatch("densities live on different domains")
    bps, sl, ic = pw.refine([f_a, f_b])
    e = np.concatenate(([f_a.lo], bps, [f_a.hi]))
    log_za = pw.log_exp_integral(f_a, lam)
    log_zb = pw.log_exp_integral(f_b, lam)
    # piece-level masses
    la = pw._log_mass(e[:-1], e[1:], sl[0], ic[0], lam) - log_za
    lb = pw._log_mass(e[:-1], e[1:], sl[1], ic[1], lam) - log_zb
    piece = np.max(np.abs(la - lb))
    # pointwise densities at both ends of each refined piece
    ends = []
    for side in (e[:-1], e[1:]):
        ga = lam * (sl[0] * side + ic[0]) - log_za
        gb = lam * (sl[1] * side + ic[1]) - log_zb
        ends.append(np.abs(ga - gb))
    return float(max(piece, np.max(ends[0]), np.max(ends[1])))


def privacy_ratio_check(curves_a: Sequence, curves_b: Sequence, eps: float, H: float,
                        domain=None) -> float:
    """Exact worst-case log probability ratio of ``exp_mech_1d`` on two neighbouring inputs.

    Neighbouring means the multisets differ by adding or removing one curve.
    """
    fa, fb = _fns(curves_a), _fns(curves_b)
    ca, cb = Counter(_key(f) for f in fa), Counter(_key(f) for f in fb)
    diff = sum(((ca - cb) + (cb - ca)).values())
    if diff > 1:
        raise NotNeighbors(f"inputs differ in {diff} curves")
    if domain is None:
        domain = (fa or fb)[0].domain
    lam = eps / (2.0 * H)
    return density_log_ratio(pw.sum_fns(fa, domain), pw.sum_fns(fb, domain), lam)
