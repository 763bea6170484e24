"""Empirical (w, k)-dispersion of collections of 1-d piecewise functions.

A curve *splits* a ball ``[c - w, c + w]`` when it has at least one
breakpoint in the closed ball.  Closed balls over-count boundary cases, which
only makes the reported ``k`` more conservative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .piecewise import PiecewiseFn1D, UtilityCurve

__all__ = [
    "DispersionProfile",
    "KappaReport",
    "CONCENTRATION_CONSTANT",
    "collect_breakpoints",
    "max_interval_count",
    "dispersion_at",
    "empirical_profile",
    "kappa_check",
]

CONCENTRATION_CONSTANT = 5.0


def _fn(c) -> PiecewiseFn1D:
    return c.fn if isinstance(c, UtilityCurve) else c


@dataclass(frozen=True)
class DispersionProfile:
    ws: tuple[float, ...]
    ks: tuple[int, ...]

    def __post_init__(self):
        if len(self.ws) != len(self.ks):
            raise ValueError("ws and ks differ in length")

    def pairs(self):
        return list(zip(self.ws, self.ks))

    def to_json(self):
        return [{"w": w, "k": k} for w, k in self.pairs()]


@dataclass(frozen=True)
class KappaReport:
    observed_k: int
    bound_k: float
    passed: bool


def collect_breakpoints(curves: Sequence) -> list[tuple[float, int]]:
    """All breakpoints of all curves, sorted, tagged with the curve index."""
    out = [(float(b), i) for i, c in enumerate(curves) for b in _fn(c).breakpoints]
    out.sort()
    return out


def max_interval_count(points, w: float) -> int:
    """Largest number of points in any closed interval of width ``w``.

    An optimal interval can always be slid right until its left end hits a
    point, so only the windows ``[p, p + w]`` need checking.
    """
    p = np.sort(np.asarray(points, dtype=float))
    if len(p) == 0:
        return 0
    right = np.searchsorted(p, p + w, side="right")
    return int(np.max(right - np.arange(len(p))))


def dispersion_at(curves: Sequence, rho0: float, w: float) -> int:
    """Number of curves with a breakpoint in ``[rho0 - w, rho0 + w]``."""
    a, b = rho0 - w, rho0 + w
    count = 0
    for c in curves:
        bp = _fn(c).breakpoints
        i = np.searchsorted(bp, a, side="left")
        if i < len(bp) and bp[i] <= b:
            count += 1
    return count


def _covered_centres(bp: np.ndarray, w: float, lo: float, hi: float):
    """Union of [b - w, b + w] over one curve's breakpoints, clipped to [lo, hi]."""
    if len(bp) == 0:
        return np.empty(0), np.empty(0)
    starts = np.maximum(bp - w, lo)
    ends = np.minimum(bp + w, hi)
    # merge overlapping/touching closed intervals (bp is sorted)
    new = np.concatenate(([True], starts[1:] > ends[:-1]))
    group = np.cumsum(new) - 1
    s = starts[new]
    e = np.zeros(len(s))
    np.maximum.at(e, group, ends)
    return s, e


def empirical_profile(curves: Sequence, ws: Sequence[float]) -> DispersionProfile:
    """For each radius ``w``: the most curves any radius-``w`` ball splits.

    Ball centres range over the common domain.  A curve splits the ball at
    centre ``c`` exactly when ``c`` lies in the union of ``[b - w, b + w]``
    over its breakpoints, so the answer is the maximum depth of those unions,
    found by a sweep.  The maximum is attained at some ``b +- w`` or at a
    domain end, so this matches enumerating that finite candidate set.
    """
    ws = [float(w) for w in ws]
    if any(w <= 0 for w in ws) or any(b < a for a, b in zip(ws, ws[1:])):
        raise ValueError("ws must be positive and sorted")
    fns = [_fn(c) for c in curves]
    if not fns:
        return DispersionProfile(tuple(ws), tuple(0 for _ in ws))
    lo, hi = fns[0].lo, fns[0].hi
    ks = []
    for w in ws:
        starts, ends = [], []
        for f in fns:
            s, e = _covered_centres(f.breakpoints, w, lo, hi)
            starts.append(s)
            ends.append(e)
        s = np.sort(np.concatenate(starts))
        e = np.sort(np.concatenate(ends))
        if len(s) == 0:
            ks.append(0)
            continue
        # depth at x = #starts <= x  -  #ends < x ; maximised at some start
        depth = np.searchsorted(s, s, side="right") - np.searchsorted(e, s, side="left")
        ks.append(int(depth.max()))
    # larger balls contain smaller ones; enforce against round-off in clipping
    ks = list(np.maximum.accumulate(ks)) if ks else ks
    return DispersionProfile(tuple(ws), tuple(int(k) for k in ks))


def kappa_check(samples, kappa: float, w: float, zeta: float,
                constant: float = CONCENTRATION_CONSTANT) -> KappaReport:
    """Compare the densest width-``w`` window against the concentration bound.

    The bound is ``r * w * kappa + constant * sqrt(r * ln(1 / zeta))`` for
    ``r`` samples drawn from ``kappa``-bounded densities.
    """
    r = len(samples)
    observed = max_interval_count(samples, w)
    bound = r * w * kappa + constant * math.sqrt(r * math.log(1.0 / zeta))
    return KappaReport(observed, bound, observed <= bound)
