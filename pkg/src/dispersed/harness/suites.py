"""Named verification suites, one per acceptance property.

Each suite returns a ``SuiteResult``; ``passed`` is the verdict at the stated
tolerance and ``warning_only`` marks suites whose failure is reported but
does not fail ``verify``.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .. import greedy, iqp, market
from .. import piecewise as pw
from ..private import privacy_ratio_check
from .pipelines import run_experiment

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all"]


@dataclass
class SuiteResult:
    name: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    warning_only: bool = False

    def line(self) -> str:
        if self.passed:
            verdict = "PASS"
        else:
            verdict = "WARN" if self.warning_only else "FAIL"
        return f"[{verdict}] {self.name}: {self.title} -- {self.detail} ({self.seconds:.1f}s)"


# greedy and brute force add the same weights in different orders
REL_TOL = 1e-12


def _rng(*key):
    return np.random.default_rng(list(key))


# --- 1 ---------------------------------------------------------------------------


def curve_oracle(instances: int = 100, grid: int = 1000) -> tuple[bool, str]:
    """Every extracted curve equals direct execution on a parameter grid."""
    bad = {"knapsack": 0, "mwis": 0, "owr": 0, "pricing": 0}
    for i in range(instances):
        rng = _rng(1, i)
        n = int(rng.integers(2, 11))
        g = np.linspace(0.0, 10.0, grid)
        inst = greedy.gen_smoothed("knapsack", n, float(rng.uniform(1, 5)), rng,
                                   capacity_ratio=float(rng.uniform(0.2, 0.7)))
        f = pw.evaluate(greedy.knapsack_curve(inst, 10.0).fn, g)
        bad["knapsack"] += sum(f[k] != greedy.knapsack_greedy(inst, r)[1] for k, r in enumerate(g))
        inst = greedy.gen_smoothed("mwis", n, float(rng.uniform(1, 5)), rng,
                                   p=float(rng.uniform(0.1, 0.6)))
        f = pw.evaluate(greedy.mwis_curve(inst, 10.0).fn, g)
        bad["mwis"] += sum(f[k] != greedy.mwis_greedy(inst, r)[1] for k, r in enumerate(g))

        m = iqp.gen_maxcut(min(n, 8), rng)
        emb = iqp.sdp_embed(m.A, rng=rng)
        Z = rng.standard_normal(2 * m.n)
        gg = np.linspace(0.0, math.pi / 2, grid)
        f = pw.evaluate(iqp.owr_curve(m.A, emb, Z).fn, gg)
        bad["owr"] += sum(f[k] != iqp.uowr_value(m.A, emb, Z, r) for k, r in enumerate(gg))

        prof = market.gen_valuations("additive", int(rng.integers(1, 6)), 1, 2.0, 1.0, rng)
        gp = np.linspace(0.0, 1.0, grid)
        for mech, run in (("posted_price", market.posted_price_run),
                          ("second_price", market.second_price_run)):
            for which in ("revenue", "welfare"):
                f = pw.evaluate(market.curve_1d(prof, mech, which, axis=0).fn, gp)
                bad["pricing"] += sum(f[k] != run(prof, [r]).utility(which)
                                      for k, r in enumerate(gp))
    total = sum(bad.values())
    return total == 0, "mismatches " + ", ".join(f"{k}={v}" for k, v in bad.items())


# --- 2, 3 ------------------------------------------------------------------------


def knapsack_approx(instances: int = 500) -> tuple[bool, str]:
    worst, viol = math.inf, 0
    for i in range(instances):
        rng = _rng(2, i)
        n = int(rng.integers(2, 19))
        inst = greedy.gen_smoothed("knapsack", n, float(rng.uniform(1, 5)), rng,
                                   W=float(rng.uniform(1.5, 10)),
                                   capacity_ratio=float(rng.uniform(0.1, 0.8)))
        opt = greedy.brute_force_knapsack(inst)
        got = greedy.knapsack_greedy(inst, 1.0)[1]
        if opt > 0:
            worst = min(worst, got / opt)
        viol += got < opt / 2 * (1 - REL_TOL)
    return viol == 0, f"{viol} violations, worst ratio {worst:.4f}"


def mwis_approx(instances: int = 500) -> tuple[bool, str]:
    worst, viol = math.inf, 0
    for i in range(instances):
        rng = _rng(3, i)
        n = int(rng.integers(2, 15))
        inst = greedy.gen_smoothed("mwis", n, float(rng.uniform(1, 5)), rng,
                                   p=float(rng.uniform(0.05, 0.9)))
        D = max(inst.max_degree, 1)
        opt = greedy.brute_force_mwis(inst)
        got = greedy.mwis_greedy(inst, 1.0)[1]
        worst = min(worst, got * D / opt)
        viol += got < opt / D * (1 - REL_TOL)
    return viol == 0, f"{viol} violations, worst (greedy * D / OPT) {worst:.4f}"


# --- 4, 5, 7, 10, 11, 12: through the pipelines -----------------------------------


def _pipeline(cfg):
    with tempfile.TemporaryDirectory() as tmp:
        summary, _ = run_experiment(cfg, tmp)
    return summary


def dispersion_concentration() -> tuple[bool, str]:
    s = _pipeline({"pipeline": "dispersion_audit", "kappa": 2.0, "seeds": list(range(50)),
                   "params": {"r": 2500, "zeta": 0.05, "anchor": "fixed", "min_pass": 0.98}})
    ks = [r["observed_k"] for r in s["per_seed"]]
    return s["passed"], (f"{s['aggregate']['fraction_kappa_ok']:.2f} of 50 seeds within bound "
                         f"{s['per_seed'][0]['bound_k']:.1f}; observed max {max(ks)}")


def ewf_sublinear(seeds: int = 20) -> tuple[bool, str]:
    out = {}
    ratio_ok = True
    for T in (250, 2000):
        s = _pipeline({"pipeline": "online_full_info", "family": "knapsack_tiered", "T": T,
                       "kappa": 2.0, "seeds": list(range(seeds)),
                       "family_options": {"n": 10}})
        out[T] = s["aggregate"]["median_expected_regret_per_round"]
        ratio_ok &= s["passed"]
    rel = out[2000] / out[250]
    return (rel < 0.5 and ratio_ok,
            f"median regret/T: T=250 {out[250]:.4f}, T=2000 {out[2000]:.4f}, ratio {rel:.3f} "
            f"(need < 0.5); weight-ratio inequality held on every run: {ratio_ok}")


def exact_privacy(pairs: int = 100) -> tuple[bool, str]:
    worst = {}
    ok = True
    for eps in (0.1, 1.0):
        w = 0.0
        for i in range(pairs):
            rng = _rng(6, i, int(eps * 10))
            n = int(rng.integers(1, 21))
            if i % 2:
                H = 1.0
                curves = [market.curve_1d(market.gen_valuations("additive", int(rng.integers(1, 4)),
                                                                1, 2.0, 1.0, rng),
                                          "posted_price", "revenue", axis=0, h_bound=H)
                          for _ in range(n + 1)]
            else:
                H = 10.0
                curves = [greedy.knapsack_curve(greedy.gen_smoothed("knapsack", 10, 2.0, rng), 10.0)
                          for _ in range(n + 1)]
            drop = int(rng.integers(0, n + 1))
            a, b = curves, curves[:drop] + curves[drop + 1:]
            if rng.random() < 0.5:
                a, b = b, a
            r = privacy_ratio_check(a, b, eps, H, curves[0].fn.domain)
            w = max(w, r)
            ok &= r <= eps + 1e-9
        worst[eps] = w
    return ok, ", ".join(f"eps={e}: worst log-ratio {v:.6f}" for e, v in worst.items())


def expmech_utility(trials: int = 400) -> tuple[bool, str]:
    s = _pipeline({"pipeline": "private_batch", "family": "knapsack", "T": 200, "kappa": 2.0,
                   "seeds": list(range(trials)), "params": {"eps": 1.0, "zeta": 0.05}})
    return s["passed"], f"{s['aggregate']['fraction_within_bound']:.4f} of {trials} trials within bound"


# --- 8, 9 ------------------------------------------------------------------------


def owr_breakpoint_law(count: int = 10_000) -> tuple[bool, str]:
    """One raw breakpoint per Z draw (vertex cycling), so the sample is i.i.d."""
    pts = []
    per = 200
    for i in range(count // per):
        rng = _rng(8, i)
        m = iqp.gen_maxcut(8, rng)
        emb = iqp.sdp_embed(m.A, rng=rng)
        for j in range(per):
            pts.append(iqp.owr_raw_breakpoints(emb, rng.standard_normal(16))[j % 8])
    res = stats.kstest(pts, stats.uniform(loc=-math.pi / 2, scale=math.pi).cdf)
    return res.pvalue > 0.01, f"KS statistic {res.statistic:.4f}, p = {res.pvalue:.3f} on {len(pts)} points"


def gw_corner(seeds: int = 20, draws: int = 200) -> tuple[bool, str]:
    corner_bad, good, ratios = 0, 0, []
    for seed in range(seeds):
        rng = _rng(9, seed)
        m = iqp.gen_maxcut(20, rng)
        emb = iqp.sdp_embed(m.A, rng=rng)
        vals = []
        for _ in range(draws):
            Z = rng.standard_normal(2 * m.n)
            v = emb.U @ Z[: emb.rank]
            s_small = 0.5 * float(np.min(np.abs(v)))
            gw = iqp.uowr_value(m.A, emb, Z, 0.0)
            corner_bad += iqp.uslin_value(m.A, emb, Z[: m.n], s_small) != gw
            vals.append(gw)
        ratio = float(np.mean(vals)) / emb.sdp_objective
        ratios.append(ratio)
        good += ratio >= 0.85
    return (corner_bad == 0 and good >= 18,
            f"corner mismatches {corner_bad}; {good}/{seeds} seeds with mean GW >= 0.85 SDP "
            f"(min ratio {min(ratios):.3f})")


def exp3_net(seeds: int = 20) -> tuple[bool, str]:
    s = _pipeline({"pipeline": "bandit", "family": "pricing_1d", "T": 5000, "kappa": 2.0,
                   "seeds": list(range(seeds)), "stream_seed": 7, "params": {"K": 32}})
    a, b = s["aggregate"], s["bounds"]
    return s["passed"], (f"median regret {a['median_regret']:.1f} vs bound {b['exp3_regret']:.1f}; "
                         f"net {a['K']} arms vs (3R/w)^d = {b['net_size']:.0f}")


def weed_stress(seeds: int = 40, T: int = 10_000) -> tuple[bool, str]:
    s = _pipeline({"pipeline": "online_full_info", "family": "weed", "T": T,
                   "seeds": list(range(seeds)), "params": {"check_weight_ratio": False}})
    med = s["aggregate"]["median_regret"]
    floor = 0.25 * math.sqrt(T) / 64
    return med >= floor, f"median regret {med:.2f} vs floor {floor:.3f}"


def rademacher_order(reps: int = 20) -> tuple[bool, str]:
    s = _pipeline({"pipeline": "rademacher_audit", "family": "knapsack", "kappa": 2.0,
                   "seeds": list(range(reps)), "params": {"Ns": [50, 200, 800], "n_sigma": 200}})
    a = s["aggregate"]
    med = np.median([r["estimates"] for r in s["per_seed"]], axis=0)
    return s["passed"], (f"{a['bound_violations']} estimates above envelope, "
                         f"{a['total_inversions']} inversions; median estimates "
                         + ", ".join(f"N={N}: {v:.2e}" for N, v in zip(a["Ns"], med)))


# --- 13 --------------------------------------------------------------------------

DETERMINISM_CONFIGS = [
    {"pipeline": "online_full_info", "family": "knapsack", "T": 60, "seeds": [0, 1]},
    {"pipeline": "online_private", "family": "mwis", "T": 40, "seeds": [3], "params": {"eps": 0.5}},
    {"pipeline": "bandit", "family": "second_price_1d", "T": 200, "seeds": [0, 1],
     "params": {"K": 8}},
    {"pipeline": "private_batch", "family": "owr", "T": 20, "seeds": [0, 1]},
    {"pipeline": "dispersion_audit", "family": "pricing_1d", "T": 30, "seeds": [0, 1],
     "params": {"r": 500}},
    {"pipeline": "rademacher_audit", "family": "knapsack", "seeds": [0],
     "params": {"Ns": [10, 40]}},
]


def _same_tree(a: Path, b: Path) -> bool:
    names = sorted(p.name for p in a.iterdir())
    if names != sorted(p.name for p in b.iterdir()):
        return False
    return all(filecmp.cmp(a / n, b / n, shallow=False) for n in names)


def determinism() -> tuple[bool, str]:
    diffs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, cfg in enumerate(DETERMINISM_CONFIGS):
            dirs = [Path(tmp) / f"{i}-{k}" for k in range(2)]
            for d in dirs:
                run_experiment(cfg, d)
            if not _same_tree(*dirs):
                diffs.append(cfg["pipeline"])
    return not diffs, (f"{len(DETERMINISM_CONFIGS)} pipelines re-run, differing: "
                       f"{', '.join(diffs) or 'none'}")


SUITES = {
    "curve-oracle": ("curve/oracle equivalence", curve_oracle, False),
    "knapsack-approx": ("knapsack rho=1 two-approximation", knapsack_approx, False),
    "mwis-approx": ("MWIS rho=1 ratio 1/D", mwis_approx, False),
    "dispersion-concentration": ("kappa-bounded breakpoint concentration", dispersion_concentration, False),
    "ewf-sublinear": ("EWF regret sublinearity and weight-ratio inequality", ewf_sublinear, False),
    "exact-privacy": ("exact differential privacy of the 1-d mechanism", exact_privacy, False),
    "expmech-utility": ("exponential-mechanism utility bound", expmech_utility, False),
    "owr-breakpoints": ("outward-rotation breakpoint law", owr_breakpoint_law, False),
    "gw-corner": ("GW corner and approximation ratio", gw_corner, False),
    "exp3-net": ("Exp3 over a w-net", exp3_net, False),
    "weed-stress": ("lower-bound adversary stress", weed_stress, True),
    "rademacher-order": ("Rademacher estimate vs envelope", rademacher_order, False),
    "determinism": ("byte-identical re-runs", determinism, False),
}


def run_suite(name: str) -> SuiteResult:
    title, fn, warn = SUITES[name]
    t0 = time.perf_counter()
    passed, detail = fn()
    return SuiteResult(name, title, bool(passed), detail, time.perf_counter() - t0, warn)


def run_all():
    for name in SUITES:
        yield run_suite(name)
