"""Curve streams: smoothed adversaries per problem family and the two-threshold
lower-bound adversary."""
from __future__ import annotations

import math

import numpy as np

from .. import greedy, iqp, market
from ..errors import TooShort, UnknownFamily
from ..piecewise import UtilityCurve, step

__all__ = ["FAMILIES", "family_domain", "family_h_bound", "adversary_smoothed", "adversary_weed"]

FAMILIES = ("knapsack", "knapsack_tiered", "mwis", "owr", "pricing_1d", "second_price_1d")

_DEFAULTS = {
    "knapsack": {"n": 10, "B": 10.0, "W": 4.0},
    "knapsack_tiered": {"n": 10, "B": 10.0, "capacity": 3.9},
    "mwis": {"n": 8, "B": 10.0, "p": 0.3},
    "owr": {"n": 8, "rank": None},
    "pricing_1d": {"n": 5, "W": 1.0},
    "second_price_1d": {"n": 5, "W": 1.0},
}


def _opts(family, opts):
    if family not in _DEFAULTS:
        raise UnknownFamily(f"unknown family {family!r}; expected one of {FAMILIES}")
    out = dict(_DEFAULTS[family])
    out.update({k: v for k, v in (opts or {}).items() if v is not None})
    return out


def family_domain(family: str, **opts) -> tuple[float, float]:
    o = _opts(family, opts)
    if family in ("knapsack", "knapsack_tiered", "mwis"):
        return (0.0, float(o["B"]))
    if family == "owr":
        return (0.0, math.pi / 2)
    return (0.0, float(o["W"]))


def family_h_bound(family: str, **opts) -> float:
    """A range bound for the family's utilities that holds before any data is seen."""
    o = _opts(family, opts)
    if family in ("knapsack", "mwis"):
        return float(o["n"])            # at most n items / vertices of value <= 1
    if family == "knapsack_tiered":
        return float(math.floor(o["capacity"]))  # sizes >= 1
    if family == "owr":
        return 1.0                      # cut weight of a normalised Laplacian
    return float(o["W"])                # one item, price never above its value


def adversary_smoothed(family: str, T: int, kappa: float, rng, **opts) -> list[UtilityCurve]:
    """``T`` curves from fresh kappa-smoothed instances of ``family``."""
    o = _opts(family, opts)
    H = family_h_bound(family, **opts)
    out = []
    for t in range(T):
        tag = f"{family}:{t}"
        if family == "knapsack":
            inst = greedy.gen_smoothed("knapsack", o["n"], kappa, rng, W=o["W"])
            out.append(greedy.knapsack_curve(inst, o["B"], h_bound=H, tag=tag))
        elif family == "knapsack_tiered":
            inst = greedy.tiered_knapsack(o["n"], kappa, rng, o["capacity"])
            out.append(greedy.knapsack_curve(inst, o["B"], h_bound=H, tag=tag))
        elif family == "mwis":
            inst = greedy.gen_smoothed("mwis", o["n"], kappa, rng, p=o["p"])
            out.append(greedy.mwis_curve(inst, o["B"], h_bound=H, tag=tag))
        elif family == "owr":
            inst = iqp.gen_maxcut(o["n"], rng)
            emb = iqp.sdp_embed(inst.A, o["rank"], rng=rng)
            Z = rng.standard_normal(2 * o["n"])
            c = iqp.owr_curve(inst.A, emb, Z, h_bound=H, tag=tag)
            out.append(UtilityCurve(c.fn, H, tag, (inst, emb, Z)))
        else:
            prof = market.gen_valuations("additive", o["n"], 1, kappa, o["W"], rng)
            mech = "posted_price" if family == "pricing_1d" else "second_price"
            out.append(market.curve_1d(prof, mech, "revenue", axis=0, W=o["W"],
                                       h_bound=H, tag=tag))
    return out


def adversary_weed(T: int, rng, lower: bool = False) -> list[UtilityCurve]:
    """I.i.d. draws of two threshold curves on ``[0, 1]`` with a ``1/(8 sqrt T)`` bias.

    ``u0`` is 1/2 below 1/2 and 0 from 1/2 on; ``u1`` is 1/2 below and 1 from
    1/2 on.  The upper adversary plays ``u0`` with probability
    ``1/2 - 1/(8 sqrt T)``; ``lower`` flips the sign of the bias.
    """
    if T < 16:
        raise TooShort(f"T must be at least 16, got {T}")
    bias = 1.0 / (8.0 * math.sqrt(T))
    p0 = 0.5 + bias if lower else 0.5 - bias
    u0 = UtilityCurve(step([0.5, 0.0], [0.5]), 1.0, "u0")
    u1 = UtilityCurve(step([0.5, 1.0], [0.5]), 1.0, "u1")
    pick0 = rng.random(T) < p0
    return [u0 if z else u1 for z in pick0]
