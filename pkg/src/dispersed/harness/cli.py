"""Command line entry point: ``dispersed run|verify|extract-curve|report``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import greedy, iqp, market
from ..errors import ConfigError, DispersedError
from .pipelines import OUTPUT_ENV, run_dir_for, run_experiment
from .config import load_config
from .report import read_summary
from .suites import SUITES, run_suite

CURVE_FAMILIES = ("knapsack", "mwis", "owr", "pricing_1d", "second_price_1d")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else run_dir_for(cfg)
    summary, run_dir = run_experiment(cfg, out)
    for c in summary["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['detail']}")
    print(f"wrote {run_dir}")
    return 0 if summary["passed"] else 1


def _cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        res = run_suite(name)
        print(res.line(), flush=True)
        failed += not res.passed and not res.warning_only
    return 1 if failed else 0


def _extract(rec: dict, family: str, B: float, seed: int, which: str):
    if family in ("knapsack", "mwis"):
        rec = dict(rec, family=family)
        inst = greedy.instance_from_json(rec)
        if family == "knapsack":
            return greedy.knapsack_curve(inst, B)
        return greedy.mwis_curve(inst, B)
    if family == "owr":
        inst = iqp.IqpInstance.from_json(rec)
        rng = np.random.default_rng(seed)
        emb = iqp.sdp_embed(inst.A, rng=rng)
        Z = np.asarray(rec["Z"], dtype=float) if "Z" in rec else rng.standard_normal(2 * inst.n)
        offset = 0.0 if np.all(np.linalg.eigvalsh(inst.A) >= -1e-12) else inst.abs_mass
        return iqp.owr_curve(inst.A, emb, Z, offset=offset)
    prof = market.ValuationProfile.from_json(rec)
    mech = "posted_price" if family == "pricing_1d" else "second_price"
    axis = 0 if prof.m == 1 else "uniform"
    return market.curve_1d(prof, mech, which, axis=axis, W=B)


def _cmd_extract(args) -> int:
    rec = json.loads(Path(args.instance).read_text())
    family = args.family or rec.get("family") or rec.get("model")
    if family not in CURVE_FAMILIES:
        raise DispersedError(f"--family must be one of {CURVE_FAMILIES}")
    B = args.B
    if B is None:
        B = float(rec.get("W", 1.0)) if family.endswith("_1d") else 10.0
    curve = _extract(rec, family, B, args.seed, args.which)
    print(json.dumps(curve.to_json(), sort_keys=True, indent=2))
    return 0


def _cmd_report(args) -> int:
    doc = read_summary(args.run_dir)
    print(f"pipeline: {doc['pipeline']}")
    for k, v in sorted(doc["aggregate"].items()):
        print(f"  {k}: {v}")
    for k, v in sorted(doc.get("bounds", {}).items()):
        print(f"  bound {k}: {v}")
    for rec in doc["per_seed"]:
        keys = ("opt", "regret", "expected_regret", "suboptimality", "bound")
        parts = [f"{k}={rec[k]:.6g}" for k in keys if isinstance(rec.get(k), (int, float))]
        print(f"  seed {rec['seed']}: " + " ".join(parts))
    for c in doc["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c.get('detail', '')}")
    return 0 if doc["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dispersed", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config", help="path to a JSON config")
    p.add_argument("--out", help=f"run directory (default: ${OUTPUT_ENV} or ./runs, plus config name)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=["all", *SUITES])
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("extract-curve", help="print the utility curve of one instance file")
    p.add_argument("instance")
    p.add_argument("--family", choices=CURVE_FAMILIES)
    p.add_argument("--B", type=float, help="upper end of the parameter domain")
    p.add_argument("--which", choices=["revenue", "welfare"], default="revenue")
    p.add_argument("--seed", type=int, default=0, help="seed for the SDP start and Z (owr)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("report", help="summarise a finished run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (DispersedError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
