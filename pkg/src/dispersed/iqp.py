"""Rounding schemes for integer quadratic programs ``max z^T A z, z in {-1, 1}^n``.

The SDP relaxation is solved approximately by projected gradient ascent on a
low-rank factor with unit rows.  Two parameterised roundings sit on top:

* outward rotation by angle ``gamma``, whose utility is a step function of
  ``gamma`` with one possible jump per vertex, and
* s-linear rounding through the clipped slope ``phi_s``, whose expected value
  is smooth between the breakpoints ``|<u_i, Z>|``.

At ``gamma = 0`` and at ``s`` below every ``|<u_i, Z>|`` both reduce to plain
hyperplane (Goemans-Williamson) rounding; all three share ``_quad`` so those
corners agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DegenerateZ, NonPositiveS, NonSymmetric, TooLarge
from .piecewise import Constant, UtilityCurve, make_piecewise

__all__ = [
    "IqpInstance",
    "Embedding",
    "maxcut_matrix",
    "gen_maxcut",
    "sdp_embed",
    "uowr_value",
    "owr_raw_breakpoints",
    "owr_breakpoints",
    "owr_curve",
    "phi",
    "uslin_value",
    "uslin_grid",
    "slin_breakpoints",
    "slin_search_bound",
    "slin_lipschitz_report",
    "brute_force_iqp",
]

SYM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IqpInstance:
    """Symmetric objective matrix with nonnegative diagonal."""

    A: np.ndarray

    def __post_init__(self):
        A = _check_matrix(self.A)
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def abs_mass(self) -> float:
        """``sum |a_ij|``; bounds ``|z^T A z|`` for every sign vector."""
        return float(np.abs(self.A).sum())

    def to_json(self) -> dict:
        return {"family": "iqp", "n": self.n, "matrix": self.A.tolist()}

    @classmethod
    def from_json(cls, rec: dict) -> "IqpInstance":
        return cls(np.asarray(rec["matrix"], dtype=float))


@dataclass(frozen=True, eq=False)
class Embedding:
    U: np.ndarray  # n x r, unit rows
    sdp_objective: float

    @property
    def rank(self) -> int:
        return self.U.shape[1]


def _check_matrix(A) -> np.ndarray:
    if isinstance(A, IqpInstance):
        return A.A
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSymmetric(f"matrix must be square, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0.0, atol=SYM_TOL):
        raise NonSymmetric("matrix is not symmetric")
    if np.any(np.diag(A) < 0):
        raise ValueError("diagonal must be nonnegative")
    return A


def maxcut_matrix(weights, normalize: bool = True) -> np.ndarray:
    """``A`` with ``z^T A z`` equal to the weight of the cut ``z`` (a Laplacian / 4).

    With ``normalize`` the matrix is rescaled so ``sum |a_ij| = 1``.
    """
    W = np.array(weights, dtype=float)
    np.fill_diagonal(W, 0.0)
    A = (np.diag(W.sum(axis=1)) - W) / 4.0
    if normalize:
        mass = np.abs(A).sum()
        if mass > 0:
            A = A / mass
    return A


def gen_maxcut(n: int, rng, p: float = 0.5, normalize: bool = True) -> IqpInstance:
    """Erdos-Renyi graph with uniform (0, 1] edge weights, as a max-cut IQP."""
    upper = np.triu((rng.random((n, n)) < p) * (1.0 - rng.random((n, n))), 1)
    return IqpInstance(maxcut_matrix(upper + upper.T, normalize))


def _unit_rows(U):
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def sdp_embed(A, rank: int | None = None, iters: int = 1000, tol: float = 1e-10,
              rng=None) -> Embedding:
    """Approximate ``max sum a_ij <u_i, u_j>`` over unit vectors of dimension ``rank``.

    Gradient steps on the factor are followed by row renormalisation; a step
    that lowers the objective is retried at half the length, so accepted
    objectives never decrease.
    """
    A = _check_matrix(A)
    n = A.shape[0]
    rank = n if rank is None else int(rank)
    if rank < 2:
        raise ValueError("rank must be at least 2")
    if rng is None:
        rng = np.random.default_rng(0)
    if n == 0:
        return Embedding(np.zeros((0, rank)), 0.0)
    U = _unit_rows(rng.standard_normal((n, rank)))
    obj = float(np.sum(A * (U @ U.T)))
    scale = float(np.abs(A).sum(axis=1).max()) or 1.0
    step = 1.0 / scale
    for _ in range(iters):
        G = 2.0 * (A @ U)
        while True:
            cand = _unit_rows(U + step * G)
            new = float(np.sum(A * (cand @ cand.T)))
            if new >= obj or step < 1e-12 / scale:
                break
            step *= 0.5
        if new < obj:
            break
        gain = new - obj
        U, obj = cand, new
        step = min(1.5 * step, 1e6 / scale)
        if gain <= tol * max(abs(obj), 1e-300):
            break
    return Embedding(U, obj)


def _quad(A, x) -> float:
    """``sum_i a_ii + sum_{i != j} a_ij x_i x_j``.

    For sign vectors this is exactly ``x^T A x``; for fractional ``x`` it is
    the expectation of ``z^T A z`` under independent roundings with mean ``x``.
    """
    off = A - np.diag(np.diag(A))
    return float(np.trace(A) + x @ off @ x)


def _sign(x):
    return np.where(x >= 0, 1.0, -1.0)


def _proj(emb: Embedding, z):
    z = np.asarray(z, dtype=float)
    return emb.U @ z[: emb.rank]


def uowr_value(A, emb: Embedding, Z, gamma: float) -> float:
    """Objective of sign rounding after rotating outward by ``gamma``.

    ``Z`` has length ``2n``: the first ``n`` entries project the embedding,
    the last ``n`` are the fresh coordinates.  ``sign(0)`` is ``+1``.
    """
    A = _check_matrix(A)
    n = A.shape[0]
    Z = np.asarray(Z, dtype=float)
    if gamma < 0 or gamma > math.pi / 2:
        raise ValueError("gamma must lie in [0, pi/2]")
    v = math.cos(gamma) * _proj(emb, Z[:n]) + math.sin(gamma) * Z[n:2 * n]
    return _quad(A, _sign(v))


def owr_raw_breakpoints(emb: Embedding, Z) -> np.ndarray:
    """``arctan(-<u_i, Z[:n]> / Z[n + i])`` for every vertex, in (-pi/2, pi/2)."""
    n = emb.U.shape[0]
    Z = np.asarray(Z, dtype=float)
    q = Z[n:2 * n]
    if np.any(q == 0):
        raise DegenerateZ("a rotation coordinate of Z is exactly zero")
    return np.arctan(-_proj(emb, Z[:n]) / q)


def owr_breakpoints(emb: Embedding, Z) -> np.ndarray:
    r = owr_raw_breakpoints(emb, Z)
    return np.unique(r[(r > 0) & (r < math.pi / 2)])


def owr_curve(A, emb: Embedding, Z, h_bound: float | None = None, offset: float = 0.0,
              merge: bool = True, tag: str = "") -> UtilityCurve:
    """Outward-rotation objective as a step function of gamma on ``[0, pi/2]``.

    ``offset`` is added to every value, for objectives that can go negative;
    ``h_bound`` defaults to ``offset + sum |a_ij|``.
    """
    A = _check_matrix(A)
    bps = owr_breakpoints(emb, Z)
    hi = math.pi / 2
    edges = np.concatenate(([0.0], bps, [hi]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = [uowr_value(A, emb, Z, g) + offset for g in mids]
    fn = make_piecewise((0.0, hi), bps, [Constant(v) for v in vals])
    if merge:
        fn = fn.simplify()
    h = offset + float(np.abs(A).sum()) if h_bound is None else h_bound
    return UtilityCurve(fn, h, tag)


def phi(y, s: float):
    """Clipped slope ``y / s`` inside ``[-s, s]``, ``sign(y)`` outside."""
    if s <= 0:
        raise NonPositiveS(f"s must be positive, got {s}")
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) >= s, _sign(y), y / s)


def uslin_value(A, emb: Embedding, Z, s: float, mode: str = "expected", rng=None) -> float:
    """s-linear rounding objective for the projection ``v = U Z``.

    ``expected`` returns the exact mean over the randomised rounding;
    ``sampled`` draws ``z_i = +1`` with probability ``(1 + phi_s(v_i)) / 2``.
    """
    A = _check_matrix(A)
    x = phi(_proj(emb, Z), s)
    if mode == "expected":
        return _quad(A, x)
    if mode == "sampled":
        if rng is None:
            raise ValueError("sampled mode needs an rng")
        z = np.where(rng.random(len(x)) < 0.5 * (1.0 + x), 1.0, -1.0)
        return _quad(A, z)
    raise ValueError(f"unknown mode {mode!r}")


def uslin_grid(A, emb: Embedding, Z, grid) -> np.ndarray:
    """Expected s-linear objective at every ``s`` in ``grid``."""
    A = _check_matrix(A)
    v = _proj(emb, Z)
    off = A - np.diag(np.diag(A))
    X = np.stack([phi(v, s) for s in grid])
    return np.trace(A) + np.einsum("ki,ij,kj->k", X, off, X)


def slin_breakpoints(emb: Embedding, Z, s_max: float) -> np.ndarray:
    """``|<u_i, Z>|`` inside ``(0, s_max]``, sorted."""
    if s_max <= 0:
        raise NonPositiveS("s_max must be positive")
    a = np.abs(_proj(emb, Z))
    return np.sort(a[(a > 0) & (a <= s_max)])


def slin_search_bound(n: int, T: int, zeta: float) -> float:
    """Upper end of the s search interval that holds with probability ``1 - zeta``."""
    if n < 1 or T < 1 or zeta <= 0:
        raise ValueError("need n, T >= 1 and zeta > 0")
    arg = math.sqrt(8.0 / math.pi) * 2.0 * n * T / zeta
    if arg <= 1.0:
        raise ValueError(f"zeta={zeta} is too large for n={n}, T={T}")
    return math.sqrt(2.0 * math.log(arg))


def slin_lipschitz_report(M: float, T: int, n: int, zeta: float) -> float:
    """Order of the s-linear Lipschitz constant, ``M T^3 n^5 / zeta^3`` without log factors.

    Reported only; nothing is gated on it.
    """
    return M * T ** 3 * n ** 5 / zeta ** 3


def brute_force_iqp(A) -> float:
    A = _check_matrix(A)
    if A.shape[0] > 18:
        raise TooLarge(f"n={A.shape[0]} > 18")
    return float(kernels.brute_force_iqp(np.ascontiguousarray(A)))
