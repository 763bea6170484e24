"""Experiment pipelines wired from a validated config.

Every random draw comes from generators seeded by the config's integers:
stream ``s`` uses ``default_rng([s, 0])`` and the learner or mechanism on
seed ``s`` uses ``default_rng([s, 1])``.  Nothing reads the clock or ambient
entropy, so a config re-run reproduces its files byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from .. import piecewise as pw
from ..dispersion import empirical_profile, kappa_check
from ..online import (
    RegretLedger,
    build_net,
    compute_regret,
    lambda_full_info,
    lambda_private,
    run_exp3,
    run_ewf,
    weight_ratio_check,
)
from ..private import exp_mech_1d, utility_bound
from ..rademacher import empirical_rademacher, rademacher_bound
from .adversaries import adversary_smoothed, adversary_weed, family_domain, family_h_bound
from .config import load_config
from .report import emit_report, write_csv

__all__ = ["OUTPUT_ENV", "default_output_dir", "run_dir_for", "make_stream", "stream_info",
           "run_experiment", "PIPELINES"]

OUTPUT_ENV = "DISPERSED_OUTPUT_DIR"


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


def run_dir_for(cfg: dict, root=None) -> Path:
    root = default_output_dir() if root is None else Path(root)
    if "name" in cfg:
        return root / cfg["name"]
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:12]
    return root / f"{cfg['pipeline']}-{digest}"


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def stream_info(cfg: dict) -> dict:
    """Domain, range bound and Lipschitz constant of the configured family."""
    fam = cfg.get("family", "knapsack")
    if fam.startswith("weed"):
        return {"domain": (0.0, 1.0), "H": 1.0, "L": 0.0}
    opts = cfg.get("family_options", {})
    L = 1.0 if fam in ("pricing_1d", "second_price_1d") else 0.0
    return {"domain": family_domain(fam, **opts), "H": family_h_bound(fam, **opts), "L": L}


def make_stream(cfg: dict, seed: int, T: int | None = None) -> list:
    fam = cfg["family"]
    T = cfg.get("T", 0) if T is None else T
    rng = _rng(seed, 0)
    if fam.startswith("weed"):
        return adversary_weed(T, rng, lower=fam == "weed_lower")
    return adversary_smoothed(fam, T, cfg.get("kappa", 2.0), rng, **cfg.get("family_options", {}))


def _default_ws(R: float) -> list[float]:
    return [float(w) for w in np.geomspace(R * 1e-5, R / 2, 32)]


def _check(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# --- pipelines -----------------------------------------------------------------


def _online(cfg, private: bool):
    info = stream_info(cfg)
    lo, hi = info["domain"]
    R, H = hi - lo, info["H"]
    p = cfg.get("params", {})
    ledgers, profiles, per_seed, ratio_ok = {}, {}, [], True
    for seed in cfg["seeds"]:
        curves = make_stream(cfg, seed)
        T = len(curves)
        if T == 0:
            ledgers[seed] = compute_regret([], [])
            per_seed.append({"seed": seed, "T": 0})
            continue
        if "lam" in p:
            lam = p["lam"]
        elif private:
            lam = lambda_private(p["eps"], p.get("delta", 1e-6), T, H)
        else:
            lam = lambda_full_info(1, R, p.get("w", min(1.0 / math.sqrt(T), R / 2)), T, H)
        plays, expected, _ = run_ewf(curves, lam, H, _rng(seed, 1), (lo, hi))
        ledger = compute_regret(curves, plays, prefix=True)
        ledgers[seed] = ledger
        rec = {"seed": seed, "T": T, "lam": lam,
               "expected_regret": ledger.opt - float(np.sum(expected))}
        if p.get("check_weight_ratio", True):
            prof = empirical_profile(curves, p.get("ws", _default_ws(R)))
            profiles[seed] = prof
            rows = weight_ratio_check(curves, lam, H, prof, L=info["L"])
            rec["weight_ratio_ok"] = all(r[4] for r in rows)
            rec["weight_ratio_min_margin"] = min((r[2] - r[3] for r in rows), default=None)
            ratio_ok &= rec["weight_ratio_ok"]
        per_seed.append(rec)
    reg = [ledgers[s].regret for s in cfg["seeds"]]
    exp_reg = [r["expected_regret"] for r in per_seed if "expected_regret" in r]
    agg = {"median_regret": float(np.median(reg)),
           "median_expected_regret": float(np.median(exp_reg)) if exp_reg else None,
           "T": cfg.get("T", 0)}
    if cfg.get("T"):
        agg["median_expected_regret_per_round"] = agg["median_expected_regret"] / cfg["T"]
    checks = []
    if p.get("check_weight_ratio", True):
        checks.append(_check("weight_ratio", ratio_ok, "ln(W_T+1/W_1) lower bound, 1e-6 slack"))
    bounds = {"H": H, "R": R}
    if private:
        bounds.update({"eps_total": p["eps"], "delta": p.get("delta", 1e-6)})
    return ledgers, profiles, bounds, per_seed, agg, checks


def _online_full_info(cfg):
    return _online(cfg, private=False)


def _online_private(cfg):
    return _online(cfg, private=True)


def _bandit(cfg):
    info = stream_info(cfg)
    lo, hi = info["domain"]
    R, H = hi - lo, info["H"]
    p = cfg.get("params", {})
    w = p["w"] if "w" in p else R / (2 * p.get("K", 32))
    arms = build_net([(lo, hi)], w)[:, 0]
    K = len(arms)
    curves = make_stream(cfg, cfg.get("stream_seed", cfg["seeds"][0]))
    T = len(curves)
    ledgers, per_seed = {}, []
    for seed in cfg["seeds"]:
        chosen, paid, table = run_exp3(curves, arms, H, _rng(seed, 1))
        cum_best = np.cumsum(table, axis=0).max(axis=1) if T else np.empty(0)
        totals = table.sum(axis=0) if T else np.zeros(K)
        best = int(np.argmax(totals))
        ledgers[seed] = RegretLedger(arms[chosen], paid, float(totals[best]), float(arms[best]),
                                     cum_best - np.cumsum(paid))
        per_seed.append({"seed": seed, "T": T, "K": K})
    reg = [ledgers[s].regret for s in cfg["seeds"]]
    bound = 3.0 * H * math.sqrt(T * K * math.log(K)) if K > 1 else 0.0
    net_cap = (3.0 * R / w) ** 1
    agg = {"median_regret": float(np.median(reg)), "T": T, "K": K, "w": w}
    checks = [_check("exp3_regret", agg["median_regret"] <= bound,
                     f"median {agg['median_regret']:.4g} vs 3H sqrt(TK ln K) = {bound:.4g}"),
              _check("net_size", K <= net_cap, f"{K} arms vs (3R/w)^d = {net_cap:.4g}")]
    return ledgers, {}, {"exp3_regret": bound, "net_size": net_cap, "H": H}, per_seed, agg, checks


def _private_batch(cfg):
    info = stream_info(cfg)
    lo, hi = info["domain"]
    R, H, L = hi - lo, info["H"], info["L"]
    p = cfg.get("params", {})
    eps, zeta = p.get("eps", 1.0), p.get("zeta", 0.05)
    ws = [w for w in p.get("ws", _default_ws(R)) if w < R]
    per_seed, rows, profiles = [], [], {}
    for seed in cfg["seeds"]:
        curves = make_stream(cfg, seed)
        n = len(curves)
        total = pw.sum_fns(curves, (lo, hi))
        rho = float(exp_mech_1d(curves, eps, H, _rng(seed, 1)))
        opt = pw.argmax(total)[1]
        got = float(pw.evaluate(total, rho))
        prof = empirical_profile(curves, ws)
        profiles[seed] = prof
        bound = min(utility_bound(eps, zeta, H, 1, R, w, k, L, n) for w, k in prof.pairs())
        sub = (opt - got) / n
        per_seed.append({"seed": seed, "opt": opt / n, "suboptimality": sub, "bound": bound,
                         "rho": rho, "within": sub <= bound})
        rows.append((seed, rho, got / n, sub, bound))
    frac = float(np.mean([r["within"] for r in per_seed]))
    agg = {"fraction_within_bound": frac, "trials": len(per_seed), "eps": eps, "zeta": zeta}
    checks = [_check("utility_bound", frac >= 1.0 - zeta,
                     f"{frac:.3f} of trials within the bound, need >= {1 - zeta}")]
    extra = {"trials.csv": (("seed", "rho", "avg_utility", "suboptimality", "bound"), rows)}
    return {}, profiles, {"zeta": zeta}, per_seed, agg, checks, extra


def _kappa_samples(r, kappa, rng, anchor):
    width = 1.0 / kappa
    a = 0.0 if anchor == "fixed" else rng.uniform(0.0, 1.0 - width, size=r)
    return a + width * rng.random(r)


def _dispersion_audit(cfg):
    p = cfg.get("params", {})
    kappa = cfg.get("kappa", 2.0)
    zeta = p.get("zeta", 0.05)
    r = p.get("r", 2500)
    w = p["w"] if "w" in p else 1.0 / (kappa * math.sqrt(r))
    per_seed, profiles, passes = [], {}, []
    for seed in cfg["seeds"]:
        rep = kappa_check(_kappa_samples(r, kappa, _rng(seed, 1), p.get("anchor", "fixed")),
                          kappa, w, zeta)
        passes.append(rep.passed)
        rec = {"seed": seed, "observed_k": rep.observed_k, "bound_k": rep.bound_k,
               "kappa_ok": rep.passed}
        if "family" in cfg and cfg.get("T", 0) > 0:
            curves = make_stream(cfg, seed)
            R = stream_info(cfg)["domain"][1] - stream_info(cfg)["domain"][0]
            profiles[seed] = empirical_profile(curves, p.get("ws", _default_ws(R)))
        per_seed.append(rec)
    frac = float(np.mean(passes))
    need = p.get("min_pass", 0.98)
    agg = {"fraction_kappa_ok": frac, "r": r, "w": w}
    checks = [_check("kappa_concentration", frac >= need,
                     f"{frac:.3f} of seeds within r w kappa + 5 sqrt(r ln 1/zeta), need >= {need:.3f}")]
    return {}, profiles, {"kappa_bound_w": w}, per_seed, agg, checks


def _rademacher_audit(cfg):
    info = stream_info(cfg)
    lo, hi = info["domain"]
    R, H, L = hi - lo, info["H"], info["L"]
    p = cfg.get("params", {})
    Ns = p.get("Ns", [50, 200, 800])
    ws = [w for w in p.get("ws", _default_ws(R)) if w < R]
    per_seed, inversions, over = [], 0, 0
    for seed in cfg["seeds"]:
        ests, ses, bnds = [], [], []
        for N in Ns:
            curves = [c.fn.scale(1.0 / H) for c in make_stream(cfg, seed * 1000003 + N, N)]
            est, se = empirical_rademacher(curves, p.get("n_sigma", 200), _rng(seed * 1000003 + N, 1))
            prof = empirical_profile(curves, ws)
            bnd = min(rademacher_bound(1, R, w, L / H, k, N) for w, k in prof.pairs())
            ests.append(est)
            ses.append(se)
            bnds.append(bnd)
            over += est > bnd
        inv = sum(a < b for a, b in zip(ests, ests[1:]))
        inversions += inv
        per_seed.append({"seed": seed, "Ns": Ns, "estimates": ests, "std_errors": ses,
                         "bounds": bnds, "inversions": inv})
    agg = {"total_inversions": inversions, "bound_violations": over, "Ns": Ns}
    checks = [_check("below_envelope", over == 0, f"{over} estimates above the envelope"),
              _check("decreasing_in_N", inversions <= 1, f"{inversions} inversions in total")]
    return {}, {}, {"envelope": "constant-1, order comparison only"}, per_seed, agg, checks


PIPELINES = {
    "online_full_info": _online_full_info,
    "online_private": _online_private,
    "bandit": _bandit,
    "private_batch": _private_batch,
    "dispersion_audit": _dispersion_audit,
    "rademacher_audit": _rademacher_audit,
}


def run_experiment(config, out_dir=None) -> tuple[dict, Path]:
    """Validate ``config``, run its pipeline and write the report files.

    Returns ``(summary, run directory)``.
    """
    cfg = load_config(config)
    result = PIPELINES[cfg["pipeline"]](cfg)
    ledgers, profiles, bounds, per_seed, agg, checks = result[:6]
    extra = result[6] if len(result) > 6 else {}
    run_dir = Path(out_dir) if out_dir is not None else run_dir_for(cfg)
    summary = {"config": cfg, "pipeline": cfg["pipeline"], "per_seed": per_seed, "aggregate": agg, "checks": checks}
    emit_report(run_dir, ledgers, profiles, bounds, summary)
    for fname, (cols, rows) in extra.items():
        write_csv(run_dir / fname, cols, rows)
    return summary, run_dir
