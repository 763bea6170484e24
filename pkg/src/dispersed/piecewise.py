"""One-dimensional piecewise constant / affine functions.

A :class:`PiecewiseFn1D` lives on a closed interval ``[lo, hi]`` cut at
strictly increasing interior breakpoints.  Piece ``i`` covers the half-open
interval ``[edge_i, edge_{i+1})`` (the last piece also owns ``hi``), so
evaluation is right-continuous at every breakpoint.  Each piece stores an
affine form ``slope * rho + intercept``; a piece with zero slope is a
constant piece.

The exponential routines (:func:`log_exp_integral`, :func:`sample_exp`) work
with ``exp(lam * f)`` and subtract the running maximum of the exponent before
exponentiating, so ``lam * f`` may be arbitrarily large.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DomainMismatch,
    EmptyDomain,
    IntervalOutOfDomain,
    NonFiniteMass,
    OutOfDomain,
    PieceCountMismatch,
    UnsortedBreakpoints,
)

__all__ = [
    "Constant",
    "Affine",
    "Piece",
    "PiecewiseFn1D",
    "UtilityCurve",
    "make_piecewise",
    "constant",
    "step",
    "sum_fns",
    "evaluate",
    "argmax",
    "exp_integral",
    "log_exp_integral",
    "piece_log_masses",
    "sample_exp",
    "refine",
]


@dataclass(frozen=True)
class Constant:
    c: float


@dataclass(frozen=True)
class Affine:
    slope: float
    intercept: float


Form = Union[Constant, Affine]


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    form: Form

    def __call__(self, rho):
        if isinstance(self.form, Constant):
            return self.form.c
        return self.form.slope * rho + self.form.intercept


@dataclass(frozen=True, eq=False)
class PiecewiseFn1D:
    """Piecewise affine function on ``[lo, hi]``; use :func:`make_piecewise` to build one."""

    lo: float
    hi: float
    breakpoints: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray

    @property
    def domain(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def edges(self) -> np.ndarray:
        """Piece boundaries including both domain ends."""
        return np.concatenate(([self.lo], self.breakpoints, [self.hi]))

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    @property
    def is_piecewise_constant(self) -> bool:
        return bool(np.all(self.slopes == 0.0))

    @property
    def pieces(self) -> list[Piece]:
        e = self.edges
        out = []
        for i, (a, b) in enumerate(zip(self.slopes, self.intercepts)):
            form = Constant(float(b)) if a == 0.0 else Affine(float(a), float(b))
            out.append(Piece(float(e[i]), float(e[i + 1]), form))
        return out

    def __call__(self, rho):
        return evaluate(self, rho)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFn1D):
            return NotImplemented
        return (
            self.lo == other.lo
            and self.hi == other.hi
            and np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.slopes, other.slopes)
            and np.array_equal(self.intercepts, other.intercepts)
        )

    def __hash__(self):
        return hash((self.lo, self.hi, self.breakpoints.tobytes(),
                     self.slopes.tobytes(), self.intercepts.tobytes()))

    def __add__(self, other):
        if isinstance(other, PiecewiseFn1D):
            return sum_fns([self, other])
        return self.shift(float(other))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return self.scale(float(c))

    __rmul__ = __mul__

    def scale(self, c: float) -> PiecewiseFn1D:
        return PiecewiseFn1D(self.lo, self.hi, self.breakpoints,
                             self.slopes * c, self.intercepts * c)

    def shift(self, c: float) -> PiecewiseFn1D:
        return PiecewiseFn1D(self.lo, self.hi, self.breakpoints,
                             self.slopes, self.intercepts + c)

    def piece_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-piece (inf, sup) over the closure of each piece."""
        e = self.edges
        left = self.slopes * e[:-1] + self.intercepts
        right = self.slopes * e[1:] + self.intercepts
        return np.minimum(left, right), np.maximum(left, right)

    def value_range(self) -> tuple[float, float]:
        lo, hi = self.piece_bounds()
        return float(lo.min()), float(hi.max())

    def simplify(self) -> PiecewiseFn1D:
        """Drop breakpoints whose neighbouring pieces carry the same form."""
        if len(self.breakpoints) == 0:
            return self
        same = (self.slopes[1:] == self.slopes[:-1]) & (self.intercepts[1:] == self.intercepts[:-1])
        if not same.any():
            return self
        keep = np.concatenate(([True], ~same))
        return PiecewiseFn1D(self.lo, self.hi, self.breakpoints[~same],
                             self.slopes[keep], self.intercepts[keep])

    def to_json(self) -> dict:
        pieces = []
        for p in self.pieces:
            if isinstance(p.form, Constant):
                pieces.append({"lo": p.lo, "hi": p.hi, "form": "constant", "params": [p.form.c]})
            else:
                pieces.append({"lo": p.lo, "hi": p.hi, "form": "affine",
                               "params": [p.form.slope, p.form.intercept]})
        return {
            "domain": [float(self.lo), float(self.hi)],
            "breakpoints": [float(b) for b in self.breakpoints],
            "pieces": pieces,
        }

    @classmethod
    def from_json(cls, record: dict) -> PiecewiseFn1D:
        forms: list[Form] = []
        for p in record["pieces"]:
            if p["form"] == "constant":
                forms.append(Constant(float(p["params"][0])))
            elif p["form"] == "affine":
                forms.append(Affine(float(p["params"][0]), float(p["params"][1])))
            else:
                raise ValueError(f"unknown piece form {p['form']!r}")
        return make_piecewise(tuple(record["domain"]), record["breakpoints"], forms)


@dataclass(frozen=True, eq=False)
class UtilityCurve:
    """A utility-vs-parameter curve for one problem instance.

    ``instance`` optionally carries the generating instance; it is not part of
    the serialised record.
    """

    fn: PiecewiseFn1D
    h_bound: float
    instance_tag: str = ""
    instance: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.h_bound < 0:
            raise ValueError("h_bound must be nonnegative")
        lo, hi = self.fn.value_range()
        slack = 1e-9 * max(1.0, self.h_bound)
        if lo < -slack or hi > self.h_bound + slack:
            raise ValueError(
                f"curve values [{lo}, {hi}] leave [0, {self.h_bound}]"
            )

    def __call__(self, rho):
        return evaluate(self.fn, rho)

    def to_json(self) -> dict:
        return {"fn": self.fn.to_json(), "h_bound": self.h_bound, "instance_tag": self.instance_tag}

    @classmethod
    def from_json(cls, record: dict) -> UtilityCurve:
        return cls(PiecewiseFn1D.from_json(record["fn"]), float(record["h_bound"]),
                   str(record.get("instance_tag", "")))


def _as_fn(f) -> PiecewiseFn1D:
    return f.fn if isinstance(f, UtilityCurve) else f


def make_piecewise(domain: Sequence[float], breakpoints: Iterable[float],
                   pieces: Sequence) -> PiecewiseFn1D:
    """Validate and build a piecewise function.

    ``pieces`` holds one form per piece, left to right: a :class:`Constant`,
    an :class:`Affine`, or a bare number (read as a constant).
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise EmptyDomain(f"domain [{lo}, {hi}] is empty")
    bps = np.asarray(list(breakpoints), dtype=float)
    if bps.ndim != 1:
        raise UnsortedBreakpoints("breakpoints must be one-dimensional")
    if len(bps) and (np.any(np.diff(bps) <= 0)):
        raise UnsortedBreakpoints("breakpoints must be strictly increasing")
    if len(bps) and (bps[0] <= lo or bps[-1] >= hi):
        raise UnsortedBreakpoints("breakpoints must lie strictly inside the domain")
    if len(pieces) != len(bps) + 1:
        raise PieceCountMismatch(f"{len(pieces)} pieces for {len(bps)} breakpoints")
    slopes = np.zeros(len(pieces))
    intercepts = np.zeros(len(pieces))
    for i, p in enumerate(pieces):
        if isinstance(p, Piece):
            p = p.form
        if isinstance(p, Affine):
            slopes[i], intercepts[i] = p.slope, p.intercept
        elif isinstance(p, Constant):
            intercepts[i] = p.c
        else:
            intercepts[i] = float(p)
    return PiecewiseFn1D(lo, hi, bps, slopes, intercepts)


def constant(c: float, domain=(0.0, 1.0)) -> PiecewiseFn1D:
    return make_piecewise(domain, [], [Constant(c)])


def step(values: Sequence[float], breakpoints: Sequence[float], domain=(0.0, 1.0)) -> PiecewiseFn1D:
    """Piecewise-constant function from piece values."""
    return make_piecewise(domain, breakpoints, [Constant(v) for v in values])


def refine(fns: Sequence[PiecewiseFn1D]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Express every function on the common refinement of all their pieces.

    Returns ``(breakpoints, slopes, intercepts)`` where the last two have shape
    ``(len(fns), n_refined_pieces)``.
    """
    fns = [_as_fn(f) for f in fns]
    _check_domains(fns)
    bps = np.unique(np.concatenate([f.breakpoints for f in fns])) if fns else np.empty(0)
    starts = np.concatenate(([fns[0].lo], bps)) if fns else np.empty(0)
    slopes = np.empty((len(fns), len(starts)))
    intercepts = np.empty((len(fns), len(starts)))
    for k, f in enumerate(fns):
        idx = np.searchsorted(f.breakpoints, starts, side="right")
        slopes[k] = f.slopes[idx]
        intercepts[k] = f.intercepts[idx]
    return bps, slopes, intercepts


def _check_domains(fns):
    if fns:
        lo, hi = fns[0].lo, fns[0].hi
        for f in fns[1:]:
            if f.lo != lo or f.hi != hi:
                raise DomainMismatch(f"domain [{f.lo}, {f.hi}] != [{lo}, {hi}]")


def sum_fns(fns: Sequence, domain=(0.0, 1.0)) -> PiecewiseFn1D:
    """Pointwise sum; breakpoints are the exact union of all inputs' breakpoints.

    The empty sum is the constant zero on ``domain``.
    """
    fns = [_as_fn(f) for f in fns]
    if not fns:
        return constant(0.0, domain)
    if len(fns) == 1:
        return fns[0]
    _check_domains(fns)
    first = fns[0]
    if all(np.array_equal(f.breakpoints, first.breakpoints) for f in fns[1:]):
        slopes = first.slopes.copy()
        intercepts = first.intercepts.copy()
        for f in fns[1:]:
            slopes += f.slopes
            intercepts += f.intercepts
        return PiecewiseFn1D(first.lo, first.hi, first.breakpoints, slopes, intercepts)
    bps = np.unique(np.concatenate([f.breakpoints for f in fns]))
    starts = np.concatenate(([first.lo], bps))
    slopes = np.zeros(len(starts))
    intercepts = np.zeros(len(starts))
    for f in fns:
        idx = np.searchsorted(f.breakpoints, starts, side="right")
        slopes += f.slopes[idx]
        intercepts += f.intercepts[idx]
    return PiecewiseFn1D(first.lo, first.hi, bps, slopes, intercepts)


def evaluate(f, rho):
    """Value at ``rho`` (scalar or array); right-continuous at breakpoints."""
    f = _as_fn(f)
    r = np.asarray(rho, dtype=float)
    if np.any((r < f.lo) | (r > f.hi)) or np.any(np.isnan(r)):
        raise OutOfDomain(f"rho outside [{f.lo}, {f.hi}]")
    idx = np.searchsorted(f.breakpoints, r, side="right")
    val = f.slopes[idx] * r + f.intercepts[idx]
    return float(val) if val.ndim == 0 else val


def argmax(f) -> tuple[float, float]:
    """Supremum of ``f`` and a representative maximiser.

    Constant pieces are represented by their midpoint, decreasing affine
    pieces by their left end and increasing affine pieces by their right end.
    For an increasing piece ending at a breakpoint the supremum is approached
    but, by right-continuity, not attained.  Ties go to the leftmost piece.
    """
    f = _as_fn(f)
    e = f.edges
    left = f.slopes * e[:-1] + f.intercepts
    right = f.slopes * e[1:] + f.intercepts
    sup = np.where(f.slopes > 0, right, left)
    i = int(np.argmax(sup))
    a = f.slopes[i]
    if a == 0.0:
        rho = 0.5 * (e[i] + e[i + 1])
    elif a < 0.0:
        rho = e[i]
    else:
        rho = e[i + 1]
    return float(rho), float(sup[i])


def _clip(f: PiecewiseFn1D, a: float, b: float):
    if a < f.lo or b > f.hi or a > b:
        raise IntervalOutOfDomain(f"[{a}, {b}] not inside [{f.lo}, {f.hi}]")
    e = f.edges
    los = np.maximum(e[:-1], a)
    his = np.minimum(e[1:], b)
    keep = his > los
    return los[keep], his[keep], f.slopes[keep], f.intercepts[keep]


def _log_mass(los, his, slopes, intercepts, lam):
    """log of the integral of exp(lam * (slope*rho + intercept)) over each piece."""
    length = his - los
    g_lo = lam * (slopes * los + intercepts)
    g_hi = lam * (slopes * his + intercepts)
    g_max = np.maximum(g_lo, g_hi)
    delta = np.abs(g_hi - g_lo)
    # -expm1(-d)/d -> 1 as d -> 0 (the constant-piece limit)
    with np.errstate(divide="ignore", invalid="ignore"):
        shape = np.where(delta > 0, -np.expm1(-delta) / np.where(delta > 0, delta, 1.0), 1.0)
    return g_max + np.log(length) + np.log(shape)


def piece_log_masses(f, lam: float) -> np.ndarray:
    """log Z_i for every piece of ``f`` under the weight ``exp(lam * f)``."""
    f = _as_fn(f)
    e = f.edges
    return _log_mass(e[:-1], e[1:], f.slopes, f.intercepts, lam)


def log_exp_integral(f, lam: float, interval=None) -> float:
    """log of the integral of ``exp(lam * f)`` over ``interval`` (default: the domain)."""
    f = _as_fn(f)
    a, b = (f.lo, f.hi) if interval is None else (float(interval[0]), float(interval[1]))
    los, his, sl, ic = _clip(f, a, b)
    if len(los) == 0:
        return -math.inf
    lm = _log_mass(los, his, sl, ic, lam)
    top = np.max(lm)
    if not np.isfinite(top):
        raise NonFiniteMass("non-finite piece mass")
    return float(top + np.log(np.sum(np.exp(lm - top))))


def exp_integral(f, lam: float, interval=None) -> float:
    """Integral of ``exp(lam * f)`` over ``interval``, in closed form per piece.

    Overflows to ``inf`` for very large exponents; use
    :func:`log_exp_integral` in that regime.
    """
    try:
        return math.exp(log_exp_integral(f, lam, interval))
    except OverflowError:
        return math.inf


def _within_piece(lo, hi, c, u):
    """Inverse CDF of the density proportional to exp(c * rho) on [lo, hi)."""
    length = hi - lo
    x = u * length
    tiny = np.abs(c * length) < 1e-12
    neg = (c < 0) & ~tiny
    pos = (c > 0) & ~tiny
    if np.any(neg):
        cn, ln, un = c[neg], length[neg], u[neg]
        x[neg] = np.log1p(un * np.expm1(cn * ln)) / cn
    if np.any(pos):
        cp, lp, up = c[pos], length[pos], u[pos]
        # integrate from the right end so expm1 never overflows
        x[pos] = lp + np.log1p((1.0 - up) * np.expm1(-cp * lp)) / cp
    rho = lo + np.clip(x, 0.0, length)
    # keep draws inside the half-open piece
    return np.where(rho >= hi, np.nextafter(hi, lo), rho)


def sample_exp(f, lam: float, rng: np.random.Generator, size=None):
    """Exact draw(s) from the density proportional to ``exp(lam * f)``.

    Stage one picks piece ``i`` with probability ``Z_i / sum_j Z_j``; stage
    two inverts the within-piece CDF in closed form.  The largest piece log
    mass is subtracted before exponentiating.
    """
    f = _as_fn(f)
    lm = piece_log_masses(f, lam)
    top = np.max(lm)
    if not np.isfinite(top) or np.any(np.isnan(lm)):
        raise NonFiniteMass("piece masses are not finite; rescale lam")
    w = np.exp(lm - top)
    cdf = np.cumsum(w)
    n = 1 if size is None else int(size)
    u1 = rng.random(n)
    idx = np.minimum(np.searchsorted(cdf, u1 * cdf[-1], side="right"), len(w) - 1)
    u2 = rng.random(n)
    e = f.edges
    rho = _within_piece(e[idx], e[idx + 1], lam * f.slopes[idx], u2)
    return float(rho[0]) if size is None else rho
