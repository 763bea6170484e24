"""Deterministic report files: per-round CSV trajectories and a JSON summary."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .config import load_schema

__all__ = ["TRAJECTORY_COLUMNS", "plain", "emit_report", "read_summary", "write_csv"]

TRAJECTORY_COLUMNS = ("t", "rho", "u_t", "cum_regret")


def plain(x):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, columns, rows) -> Path:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow([_cell(v) for v in row])
    return path


def _trajectory(ledger):
    for t in range(ledger.T):
        yield (t + 1, float(ledger.plays[t]), float(ledger.realized[t]), float(ledger.cum_regret[t]))


def emit_report(out_dir, ledgers: dict, profiles: dict | None, bounds: dict | None,
                summary: dict) -> list[Path]:
    """Write ``trajectory_seed<s>.csv`` per ledger and ``summary.json``.

    Per-seed ``opt`` and ``regret`` entries are filled in from the ledgers and
    the dispersion tables from ``profiles`` (seed -> DispersionProfile), so
    the summary cannot disagree with the trajectories.  The summary is checked
    against its schema before it is written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    per_seed = {int(r["seed"]): r for r in summary.setdefault("per_seed", [])}
    for seed, ledger in sorted((ledgers or {}).items()):
        written.append(write_csv(out / f"trajectory_seed{seed}.csv", TRAJECTORY_COLUMNS,
                                 _trajectory(ledger)))
        rec = per_seed.setdefault(int(seed), {"seed": int(seed)})
        rec["opt"] = float(ledger.opt)
        rec["regret"] = ledger.regret
    for seed, prof in sorted((profiles or {}).items()):
        per_seed.setdefault(int(seed), {"seed": int(seed)})["dispersion"] = prof.to_json()
    summary["per_seed"] = [per_seed[s] for s in sorted(per_seed)]
    summary["bounds"] = dict(bounds or {})
    summary.setdefault("aggregate", {})
    summary.setdefault("checks", [])
    summary["passed"] = all(c["passed"] for c in summary["checks"])
    doc = plain(summary)
    jsonschema.validate(doc, load_schema("summary"))
    path = out / "summary.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    written.append(path)
    return written


def read_summary(run_dir) -> dict:
    doc = json.loads((Path(run_dir) / "summary.json").read_text())
    jsonschema.validate(doc, load_schema("summary"))
    return doc
