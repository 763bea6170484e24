"""Parameterised greedy heuristics for knapsack and maximum-weight independent set.

``knapsack_curve`` / ``mwis_curve`` return the exact utility-vs-rho step
function: every place the greedy ordering can change is a known closed-form
candidate, so evaluating the greedy once per candidate cell recovers the whole
curve.  Batched evaluation runs through the compiled kernels when available.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import BadKappa, TooLarge
from .piecewise import Constant, UtilityCurve, make_piecewise

__all__ = [
    "KnapsackInstance",
    "MwisInstance",
    "knapsack_greedy",
    "knapsack_values",
    "knapsack_candidates",
    "knapsack_curve",
    "mwis_greedy",
    "mwis_values",
    "mwis_candidates",
    "mwis_curve",
    "brute_force_knapsack",
    "brute_force_mwis",
    "gen_smoothed",
    "tiered_knapsack",
    "instance_to_json",
    "instance_from_json",
]


@dataclass(frozen=True, eq=False)
class KnapsackInstance:
    values: np.ndarray
    sizes: np.ndarray
    capacity: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.sizes, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sizes", s)
        if v.shape != s.shape or v.ndim != 1:
            raise ValueError("values and sizes must be 1-d of equal length")
        if np.any(v <= 0) or np.any(v > 1):
            raise ValueError("values must lie in (0, 1]")
        if np.any(s < 1):
            raise ValueError("sizes must be >= 1")
        if not self.capacity > 0:
            raise ValueError("capacity must be positive")

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class MwisInstance:
    weights: np.ndarray
    adj: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        a = np.ascontiguousarray(np.asarray(self.adj, dtype=np.uint8))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "adj", a)
        n = len(w)
        if a.shape != (n, n):
            raise ValueError("adjacency must be n x n")
        if not np.array_equal(a, a.T) or np.any(np.diag(a)):
            raise ValueError("adjacency must be symmetric without self-loops")
        if np.any(w <= 0) or np.any(w > 1):
            raise ValueError("weights must lie in (0, 1]")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def max_degree(self) -> int:
        return int(self.adj.sum(axis=1).max()) if self.n else 0

    @classmethod
    def from_edges(cls, weights, edges):
        n = len(weights)
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            adj[i, j] = adj[j, i] = 1
        return cls(weights, adj)


# --- knapsack ----------------------------------------------------------------


def _pack(inst, order):
    remaining = float(inst.capacity)
    total = 0.0
    packed = []
    for i in order:
        s = float(inst.sizes[i])
        if s <= remaining:
            remaining -= s
            total += float(inst.values[i])
            packed.append(i)
    return packed, total


def knapsack_greedy(inst: KnapsackInstance, rho: float):
    """Better of value-order and ``v / s**rho``-order greedy packing.

    Returns ``(packed item indices, total value)``; ties in either ordering go
    to the lower index, and the value-order solution wins exact ties between
    the two.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    v = [float(x) for x in inst.values]
    s = [float(x) for x in inst.sizes]
    n = len(v)
    by_value = _pack(inst, sorted(range(n), key=lambda i: (-v[i], i)))
    score = [v[i] / s[i] ** float(rho) for i in range(n)]
    by_ratio = _pack(inst, sorted(range(n), key=lambda i: (-score[i], i)))
    best = by_ratio if by_ratio[1] > by_value[1] else by_value
    return set(best[0]), best[1]


def knapsack_values(inst: KnapsackInstance, rhos) -> np.ndarray:
    """Greedy value at many rho at once (compiled kernel when available)."""
    return kernels.knapsack_greedy_values(inst.values, inst.sizes, float(inst.capacity),
                                          np.ascontiguousarray(rhos, dtype=float))


def knapsack_candidates(inst: KnapsackInstance, B: float) -> np.ndarray:
    """rho in (0, B) where some pair of items swaps in the ratio ordering."""
    lv, ls = np.log(inst.values), np.log(inst.sizes)
    i, j = np.triu_indices(inst.n, 1)
    den = ls[i] - ls[j]
    ok = den != 0
    r = (lv[i][ok] - lv[j][ok]) / den[ok]
    return np.unique(r[(r > 0) & (r < B)])


def _curve_from_candidates(cands, B, evaluate, h_bound, tag, inst, merge):
    edges = np.concatenate(([0.0], cands, [float(B)]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = evaluate(mids)
    fn = make_piecewise((0.0, float(B)), cands, [Constant(float(x)) for x in vals])
    if merge:
        fn = fn.simplify()
    return UtilityCurve(fn, h_bound, tag, inst)


def knapsack_curve(inst: KnapsackInstance, B: float = 10.0, merge: bool = True,
                   h_bound: float | None = None, tag: str = "") -> UtilityCurve:
    """Exact greedy value as a step function of rho on ``[0, B]``.

    With ``merge`` adjacent cells with equal value are fused, so only real
    discontinuities remain as breakpoints.
    """
    h = float(inst.n) if h_bound is None else h_bound
    return _curve_from_candidates(knapsack_candidates(inst, B), B,
                                  lambda r: knapsack_values(inst, r), h, tag, inst, merge)


# --- MWIS --------------------------------------------------------------------


def mwis_greedy(inst: MwisInstance, rho: float, residual: bool = True):
    """Greedy by ``w(v) / (1 + deg(v))**rho``, deleting the pick and its neighbours.

    ``residual`` scores with degrees in the remaining graph; otherwise the
    original degrees are used.  Returns ``(vertex set, total weight)``.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    w = [float(x) for x in inst.weights]
    n = len(w)
    nbrs = [np.flatnonzero(inst.adj[v]).tolist() for v in range(n)]
    deg = [len(nb) for nb in nbrs]
    alive = [True] * n
    chosen, total = [], 0.0
    rho = float(rho)
    while True:
        best, best_score = -1, 0.0
        for v in range(n):
            if alive[v]:
                sc = w[v] / float(1 + deg[v]) ** rho
                if best < 0 or sc > best_score:
                    best, best_score = v, sc
        if best < 0:
            break
        chosen.append(best)
        total += w[best]
        gone = [best] + [v for v in nbrs[best] if alive[v]]
        for v in gone:
            alive[v] = False
        if residual:
            for x in gone:
                for y in nbrs[x]:
                    if alive[y]:
                        deg[y] -= 1
    return set(chosen), total


def mwis_values(inst: MwisInstance, rhos, residual: bool = True) -> np.ndarray:
    return kernels.mwis_greedy_weights(inst.weights, inst.adj,
                                       np.ascontiguousarray(rhos, dtype=float), bool(residual))


def mwis_candidates(inst: MwisInstance, B: float) -> np.ndarray:
    """(ln w_i - ln w_j) / (ln d1 - ln d2) over i != j, d1 != d2 in 1..n, inside (0, B)."""
    n = inst.n
    if n < 2:
        return np.empty(0)
    lw = np.log(inst.weights)
    num = (lw[:, None] - lw[None, :])[~np.eye(n, dtype=bool)]
    ld = np.log(np.arange(1, n + 1, dtype=float))
    den = (ld[:, None] - ld[None, :])[~np.eye(n, dtype=bool)]
    r = (num[:, None] / den[None, :]).ravel()
    return np.unique(r[(r > 0) & (r < B)])


def mwis_curve(inst: MwisInstance, B: float = 10.0, residual: bool = True, merge: bool = True,
               h_bound: float | None = None, tag: str = "") -> UtilityCurve:
    h = float(inst.n) if h_bound is None else h_bound
    return _curve_from_candidates(mwis_candidates(inst, B), B,
                                  lambda r: mwis_values(inst, r, residual), h, tag, inst, merge)


# --- oracles -----------------------------------------------------------------


def brute_force_knapsack(inst: KnapsackInstance) -> float:
    if inst.n > 22:
        raise TooLarge(f"n={inst.n} > 22")
    return float(kernels.brute_force_knapsack(inst.values, inst.sizes, float(inst.capacity)))


def brute_force_mwis(inst: MwisInstance) -> float:
    if inst.n > 18:
        raise TooLarge(f"n={inst.n} > 18")
    return float(kernels.brute_force_mwis(inst.weights, inst.adj))


# --- smoothed generators -----------------------------------------------------


def _window_values(n, kappa, rng, anchors=None):
    """Uniform draws on per-item windows (a, a + 1/kappa] inside (0, 1]."""
    width = 1.0 / kappa
    if anchors is None:
        anchors = rng.uniform(0.0, 1.0 - width, size=n)
    anchors = np.asarray(anchors, dtype=float)
    # 1 - U lies in (0, 1], so values never hit the window's open left end
    return anchors + width * (1.0 - rng.random(n))


def gen_smoothed(family: str, n: int, kappa: float, rng, *, W: float = 4.0,
                 capacity_ratio: float = 0.4, p: float = 0.3, anchors=None):
    """Random instance whose values/weights have kappa-bounded densities.

    knapsack: sizes uniform on [1, W] independent of values, capacity
    ``capacity_ratio * sum(sizes)``.  mwis: Erdos-Renyi edges with
    probability ``p``.
    """
    if kappa < 1:
        raise BadKappa(f"kappa must be >= 1, got {kappa}")
    vals = _window_values(n, kappa, rng, anchors)
    if family == "knapsack":
        sizes = rng.uniform(1.0, W, size=n)
        return KnapsackInstance(vals, sizes, capacity_ratio * float(sizes.sum()))
    if family == "mwis":
        upper = np.triu(rng.random((n, n)) < p, 1)
        return MwisInstance(vals, (upper | upper.T).astype(np.uint8))
    raise ValueError(f"unknown family {family!r}")


def tiered_knapsack(n: int, kappa: float, rng, capacity: float = 3.9) -> KnapsackInstance:
    """Smoothed knapsack instance with a fixed three-tier item layout.

    One bulky item fills the knapsack alone, a few mid-size items pack three
    at a time, and the rest are small, low-value filler.  Value order tends to
    take the bulky item, size order takes the filler, and only intermediate
    rho packs the mid-size items.  Values are uniform on fixed windows of
    width ``1/kappa`` and sizes are drawn independently of values, so the
    smoothness assumptions hold.  At most ``floor(capacity)`` items fit
    because every size is at least 1.
    """
    if kappa < 2:
        raise BadKappa("the tiered layout needs kappa >= 2")
    n_mid = min(3, n - 1)
    n_small = n - 1 - n_mid
    width = 1.0 / kappa
    anchors = np.concatenate((
        [1.0 - width],                 # bulky
        np.full(n_mid, 0.8 - width),   # mid-size
        np.full(n_small, 0.5 - width), # filler
    ))
    values = _window_values(n, kappa, rng, anchors)
    sizes = np.concatenate((
        rng.uniform(capacity - 0.2, capacity, size=1),
        rng.uniform(1.25, 1.3, size=n_mid),
        rng.uniform(1.0, 1.05, size=n_small),
    ))
    return KnapsackInstance(values, sizes, capacity)


# --- instance files ------------------------------------------------------------


def instance_to_json(inst) -> dict:
    if isinstance(inst, KnapsackInstance):
        return {"family": "knapsack", "n": inst.n, "values": inst.values.tolist(),
                "sizes": inst.sizes.tolist(), "capacity": float(inst.capacity)}
    if isinstance(inst, MwisInstance):
        return {"family": "mwis", "n": inst.n, "values": inst.weights.tolist(),
                "adjacency": [np.flatnonzero(r).tolist() for r in inst.adj]}
    raise TypeError(type(inst))


def instance_from_json(rec: dict):
    fam = rec["family"]
    if fam == "knapsack":
        return KnapsackInstance(rec["values"], rec["sizes"], float(rec["capacity"]))
    if fam == "mwis":
        n = int(rec["n"])
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, row in enumerate(rec["adjacency"]):
            adj[i, row] = 1
        return MwisInstance(rec["values"], adj)
    raise ValueError(f"unknown family {fam!r}")
