"""Empirical Rademacher complexity of a 1-d parameterised curve family.

For a sample of ``N`` curves ``u_1..u_N`` the class is ``{rho -> u_i(rho)}``
indexed by ``rho``, so each sign draw asks for the supremum over ``rho`` of
a signed sum of piecewise functions.  On the common refinement the signed sum
is affine per cell and its supremum sits at a cell end, which makes every
draw exact; only the outer average over signs is Monte Carlo.

Each curve is centred at the left end of the domain first.  The subtracted
term ``sum_i sigma_i u_i(lo)`` has mean zero for every fixed sample, so the
expectation is unchanged, but every draw becomes nonnegative and the Monte
Carlo noise drops to the scale of the curves' variation in ``rho``.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import piecewise as pw
from .errors import BadGeometry
from .piecewise import UtilityCurve

__all__ = ["empirical_rademacher", "rademacher_bound", "signed_sup"]


def _fns(curves):
    return [c.fn if isinstance(c, UtilityCurve) else c for c in curves]


def _cell_values(fns):
    bps, sl, ic = pw.refine(fns)
    lo, hi = fns[0].lo, fns[0].hi
    e = np.concatenate(([lo], bps, [hi]))
    # value at each cell's left end and the limit at its right end
    left, right = sl * e[:-1] + ic, sl * e[1:] + ic
    anchor = left[:, :1].copy()
    return left - anchor, right - anchor, anchor[:, 0]


def signed_sup(curves: Sequence, sigma) -> float:
    """``sup_rho (1/N) sum_i sigma_i u_i(rho)`` for one sign vector."""
    fns = _fns(curves)
    left, right, anchor = _cell_values(fns)
    s = np.asarray(sigma, dtype=float)
    return float((s @ anchor + max((s @ left).max(), (s @ right).max())) / len(fns))


def empirical_rademacher(curves: Sequence, n_sigma: int, rng) -> tuple[float, float]:
    """Monte Carlo mean over ``n_sigma`` sign draws, with its standard error."""
    if n_sigma < 1:
        raise ValueError("n_sigma must be at least 1")
    fns = _fns(curves)
    if not fns:
        return 0.0, 0.0
    left, right, _ = _cell_values(fns)
    sigma = rng.choice(np.array([-1.0, 1.0]), size=(n_sigma, len(fns)))
    sups = np.maximum((sigma @ left).max(axis=1), (sigma @ right).max(axis=1)) / len(fns)
    se = float(sups.std(ddof=1) / math.sqrt(n_sigma)) if n_sigma > 1 else 0.0
    return float(sups.mean()), se


def rademacher_bound(d: int, R: float, w: float, L: float, k: float, N: int,
                     pdim_opt: float | None = None) -> float:
    """``min(sqrt(d ln(R/w) / N) + L w + k / N, sqrt(pdim / N))`` with unit constants.

    The underlying result is an order bound, so this is an envelope for
    comparison, not a certified constant.  The second branch is used only
    when ``pdim_opt`` is given.
    """
    if not (R >= w > 0) or N < 1 or d < 1:
        raise BadGeometry(f"need R >= w > 0, N >= 1, d >= 1; got R={R}, w={w}, N={N}, d={d}")
    first = math.sqrt(d / N * math.log(R / w)) + L * w + k / N
    if pdim_opt is None:
        return first
    return min(first, math.sqrt(pdim_opt / N))
