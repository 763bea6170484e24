"""Posted-price mechanisms and second-price item auctions with anonymous reserves.

Buyers and items are indexed from 0.  "Willing to buy" and "clears the
reserve" are both weak inequalities (``v >= price``).  Revenue and welfare
are summed with ``math.fsum`` so the simulator and the symbolic curves agree
on the rounding of every sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParams,
    NonAdditive,
    PriceCountMismatch,
    UnsupportedCombination,
)
from .piecewise import Affine, Constant, UtilityCurve, make_piecewise

__all__ = [
    "MODELS",
    "ValuationProfile",
    "AuctionOutcome",
    "posted_price_run",
    "second_price_run",
    "curve_1d",
    "additive_breakpoints",
    "gen_valuations",
]

MODELS = ("additive", "unit_demand", "general")
MAX_BUNDLE_ITEMS = 10


@dataclass(frozen=True, eq=False)
class ValuationProfile:
    """Valuations of ``n`` buyers over ``m`` items.

    ``values`` is ``n x m`` item values for additive and unit-demand buyers,
    or ``n x 2**m`` bundle values (indexed by item bitmask) for general ones.
    """

    model: str
    m: int
    values: np.ndarray
    W: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise BadParams(f"unknown valuation model {self.model!r}")
        v = np.array(self.values, dtype=float)
        if v.size == 0:
            v = v.reshape(0, self._width())
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[1] != self._width():
            raise BadParams(f"values must have {self._width()} columns, got shape {v.shape}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise BadParams("valuations must be finite and nonnegative")
        if self.model == "general":
            if self.m > MAX_BUNDLE_ITEMS:
                raise BadParams(f"general valuations support at most {MAX_BUNDLE_ITEMS} items")
            if np.any(v[:, 0] != 0):
                raise BadParams("the empty bundle must be worth 0")
            for i in range(self.m):
                masks = np.arange(2 ** self.m)
                without = masks[(masks >> i) & 1 == 0]
                if np.any(v[:, without | (1 << i)] < v[:, without]):
                    raise BadParams("general valuations must be monotone")

    def _width(self) -> int:
        return 2 ** self.m if self.model == "general" else self.m

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def bundle_value(self, j: int, items) -> float:
        items = sorted(items)
        row = self.values[j]
        if not items:
            return 0.0
        if self.model == "additive":
            return math.fsum(float(row[i]) for i in items)
        if self.model == "unit_demand":
            return max(float(row[i]) for i in items)
        return float(row[sum(1 << i for i in items)])

    def to_json(self) -> dict:
        return {"model": self.model, "n": self.n, "m": self.m, "W": self.W,
                "values": self.values.tolist()}

    @classmethod
    def from_json(cls, rec: dict) -> "ValuationProfile":
        prof = cls(rec["model"], int(rec["m"]), rec["values"], float(rec.get("W", 1.0)))
        if "n" in rec and int(rec["n"]) != prof.n:
            raise BadParams(f"declared n={rec['n']} but {prof.n} rows given")
        return prof


@dataclass(frozen=True, eq=False)
class AuctionOutcome:
    allocation: np.ndarray      # item -> buyer, -1 when unsold
    payments: np.ndarray        # per buyer
    revenue: float
    welfare: float
    bundles: tuple = field(default=())

    def utility(self, which: str) -> float:
        if which == "revenue":
            return self.revenue
        if which == "welfare":
            return self.welfare
        raise ValueError(f"unknown utility {which!r}")


def _prices(profile, prices):
    p = np.asarray(prices, dtype=float).reshape(-1)
    if len(p) != profile.m:
        raise PriceCountMismatch(f"{len(p)} prices for {profile.m} items")
    if np.any(p < 0):
        raise ValueError("prices must be nonnegative")
    return p


def _best_bundle(profile, j, remaining, p):
    """Utility-maximising bundle among the remaining items.

    Ties prefer buying something, then the lexicographically smallest item
    tuple.  Returns an empty tuple when nothing has nonnegative utility.
    """
    if profile.model == "additive":
        return tuple(i for i in remaining if profile.values[j, i] >= p[i])
    rem = sorted(remaining)
    best, best_u = (), 0.0
    for mask in range(1, 2 ** len(rem)):
        items = tuple(rem[k] for k in range(len(rem)) if (mask >> k) & 1)
        u = profile.bundle_value(j, items) - math.fsum(float(p[i]) for i in items)
        if u > best_u or (u == best_u and (not best or items < best)):
            best, best_u = items, u
    return best


def posted_price_run(profile: ValuationProfile, prices, ordering=None) -> AuctionOutcome:
    """Buyers arrive in ``ordering`` and each takes a favourite bundle of what is left."""
    p = _prices(profile, prices)
    order = range(profile.n) if ordering is None else list(ordering)
    if sorted(order) != list(range(profile.n)):
        raise ValueError("ordering must be a permutation of the buyers")
    if profile.model != "additive" and profile.m > MAX_BUNDLE_ITEMS:
        raise BadParams(f"bundle search supports at most {MAX_BUNDLE_ITEMS} items")
    remaining = set(range(profile.m))
    alloc = np.full(profile.m, -1, dtype=int)
    pay = np.zeros(profile.n)
    bundles = [()] * profile.n
    for j in order:
        b = _best_bundle(profile, j, sorted(remaining), p)
        if not b:
            continue
        bundles[j] = b
        alloc[list(b)] = j
        pay[j] = math.fsum(float(p[i]) for i in b)
        remaining.difference_update(b)
    revenue = math.fsum(float(p[i]) for i in range(profile.m) if alloc[i] >= 0)
    welfare = math.fsum(profile.bundle_value(j, bundles[j]) for j in range(profile.n))
    return AuctionOutcome(alloc, pay, revenue, welfare, tuple(bundles))


def _top_two(col):
    """Index of the highest bid (lowest index on ties), the highest and second-highest bids."""
    if len(col) == 0:
        return -1, 0.0, 0.0
    win = int(np.argmax(col))
    top = float(col[win])
    second = float(np.max(np.delete(col, win))) if len(col) > 1 else 0.0
    return win, top, second


def second_price_run(profile: ValuationProfile, reserves) -> AuctionOutcome:
    """Independent Vickrey auction per item with an anonymous reserve."""
    if profile.model != "additive":
        raise NonAdditive("second-price item auctions need additive bidders")
    r = _prices(profile, reserves)
    alloc = np.full(profile.m, -1, dtype=int)
    pay = np.zeros(profile.n)
    paid = []
    won = [[] for _ in range(profile.n)]
    for i in range(profile.m):
        win, top, second = _top_two(profile.values[:, i])
        if win < 0 or top < r[i]:
            continue
        price = max(second, float(r[i]))
        alloc[i] = win
        pay[win] += price
        paid.append(price)
        won[win].append(i)
    revenue = math.fsum(paid)
    welfare = math.fsum(profile.bundle_value(j, won[j]) for j in range(profile.n))
    return AuctionOutcome(alloc, pay, revenue, welfare, tuple(tuple(b) for b in won))


def _just_above(x):
    return float(np.nextafter(x, np.inf))


def curve_1d(profile: ValuationProfile, mechanism: str = "posted_price", which: str = "revenue",
             axis="uniform", prices=None, W: float | None = None,
             h_bound: float | None = None, tag: str = "") -> UtilityCurve:
    """Revenue or welfare of one additive profile as a function of a single price.

    ``axis`` is an item index (that item's price varies, the rest stay at
    ``prices``) or ``"uniform"`` (every item gets the same price).  A buyer
    still buys at price exactly ``v``, so each jump sits at the next float
    above ``v`` and the right-continuous curve matches the simulator there.

    Welfare pieces are constant.  Revenue pieces are affine with slope equal
    to the number of varying-price items that sell at the posted price.
    """
    if mechanism not in ("posted_price", "second_price"):
        raise UnsupportedCombination(f"unknown mechanism {mechanism!r}")
    if which not in ("revenue", "welfare"):
        raise ValueError(f"unknown utility {which!r}")
    if profile.model != "additive":
        raise UnsupportedCombination("symbolic curves need additive buyers")
    W = float(profile.W if W is None else W)
    m = profile.m
    base = np.zeros(m) if prices is None else _prices(profile, prices)
    if axis == "uniform":
        moving = list(range(m))
    elif isinstance(axis, (int, np.integer)) and 0 <= axis < m:
        moving = [int(axis)]
    else:
        raise ValueError(f"bad axis {axis!r}")
    fixed = [i for i in range(m) if i not in moving]

    def at(rho):
        p = base.copy()
        p[moving] = rho
        return p

    run = posted_price_run if mechanism == "posted_price" else second_price_run
    cuts = []
    for i in moving:
        col = profile.values[:, i]
        if mechanism == "posted_price":
            cuts.extend(_just_above(v) for v in col)
        elif len(col):
            _, top, second = _top_two(col)
            cuts.extend((_just_above(top), second))
    bps = np.unique([c for c in cuts if 0.0 < c < W])
    edges = np.concatenate(([0.0], bps, [W]))
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        out = run(profile, at(mid))
        if which == "welfare":
            pieces.append(Constant(out.welfare))
            continue
        slope, const = 0, []
        for i in range(m):
            if out.allocation[i] < 0:
                continue
            if i in fixed:
                const.append(float(base[i]) if mechanism == "posted_price"
                             else max(_top_two(profile.values[:, i])[2], float(base[i])))
            elif mechanism == "posted_price":
                slope += 1
            else:
                second = _top_two(profile.values[:, i])[2]
                if second >= mid:
                    const.append(second)
                else:
                    slope += 1
        icpt = math.fsum(const)
        pieces.append(Affine(float(slope), icpt) if slope else Constant(icpt))
    fn = make_piecewise((0.0, W), bps, pieces)
    if h_bound is None:
        # sales never exceed the buyer's value, so both utilities are capped
        # by the best value on every item
        h_bound = max(m * W, float(profile.values.max(axis=0).sum()) if profile.n else 0.0)
    return UtilityCurve(fn, h_bound, tag, profile)


def additive_breakpoints(instances) -> list[np.ndarray]:
    """Per-item sorted list of every buyer's value, across all instances."""
    instances = list(instances)
    if not instances:
        return []
    m = instances[0].m
    axes = [[] for _ in range(m)]
    for prof in instances:
        if prof.model != "additive":
            raise NonAdditive("axis-aligned breakpoints need additive buyers")
        if prof.m != m:
            raise BadParams("instances disagree on the number of items")
        for i in range(m):
            axes[i].extend(prof.values[:, i].tolist())
    return [np.sort(np.asarray(a, dtype=float)) for a in axes]


def gen_valuations(model: str, n: int, m: int, kappa: float, W: float, rng) -> ValuationProfile:
    """Random profile whose item values have kappa-bounded densities on ``[0, W]``.

    additive: every value is uniform on its own window of width ``1/kappa``.
    unit_demand and general: each buyer gets a shared base level plus an
    independent window draw per item, so any pair of item values has joint
    density at most ``kappa**2``.  General buyers add nonnegative pairwise
    complementarities to the item values, which keeps them monotone.
    """
    if model not in MODELS:
        raise BadParams(f"unknown valuation model {model!r}")
    if kappa * W < 1:
        raise BadParams(f"need kappa * W >= 1, got {kappa * W}")
    width = 1.0 / kappa
    if model == "additive":
        anchors = rng.uniform(0.0, W - width, size=(n, m))
        return ValuationProfile(model, m, anchors + width * rng.random((n, m)), W)
    slack = W - width
    base = rng.uniform(0.0, slack / 2, size=(n, 1))
    anchors = rng.uniform(0.0, slack / 2, size=(n, m))
    items = base + anchors + width * rng.random((n, m))
    if model == "unit_demand":
        return ValuationProfile(model, m, items, W)
    if m > MAX_BUNDLE_ITEMS:
        raise BadParams(f"general valuations support at most {MAX_BUNDLE_ITEMS} items")
    synergy = rng.uniform(0.0, width, size=(n, m, m))
    masks = np.arange(2 ** m)
    member = ((masks[:, None] >> np.arange(m)) & 1).astype(float)   # 2^m x m
    bundles = member @ items.T                                       # 2^m x n
    pair = np.einsum("bi,nij,bj->bn", member, np.triu(synergy, 1), member)
    return ValuationProfile(model, m, (bundles + pair).T, W)
