import csv
import json
import math

import numpy as np
import pytest

from dispersed.dispersion import kappa_check
from dispersed.errors import ConfigError, TooShort, UnknownFamily
from dispersed.harness import (
    FAMILIES,
    adversary_smoothed,
    adversary_weed,
    emit_report,
    load_config,
    read_summary,
    run_experiment,
)
from dispersed.harness.cli import main
from dispersed.harness.pipelines import run_dir_for
from dispersed.online import compute_regret

MINIMAL = {"pipeline": "online_full_info", "family": "knapsack", "T": 100, "seeds": [0]}


# --- adversaries ---------------------------------------------------------------


@pytest.mark.parametrize("family", FAMILIES)
def test_smoothed_streams(family):
    assert adversary_smoothed(family, 0, 2.0, np.random.default_rng(0)) == []
    a = adversary_smoothed(family, 3, 4.0, np.random.default_rng(1), n=5)
    b = adversary_smoothed(family, 3, 4.0, np.random.default_rng(1), n=5)
    assert len(a) == 3
    for x, y in zip(a, b):
        assert x.fn == y.fn
        lo, hi = x.fn.domain
        grid = np.linspace(lo, hi, 200)
        vals = np.array([x(r) for r in grid])
        assert vals.min() >= -1e-12 and vals.max() <= x.h_bound + 1e-12


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        adversary_smoothed("vertex_cover", 2, 2.0, np.random.default_rng(0))


def test_pricing_breakpoints_pass_kappa_check():
    kappa, W = 4.0, 1.0
    ok = 0
    for seed in range(20):
        stream = adversary_smoothed("pricing_1d", 100, kappa, np.random.default_rng(seed), n=5, W=W)
        pts = np.concatenate([c.fn.breakpoints for c in stream])
        ok += kappa_check(pts, kappa, 1 / math.sqrt(len(pts)), 0.05).passed
    assert ok >= 19


def test_weed_adversary():
    T = 10_000
    stream = adversary_weed(T, np.random.default_rng(2))
    assert all(list(c.fn.breakpoints) == [0.5] for c in stream[:50])
    freq1 = np.mean([c(0.75) == 1.0 for c in stream])
    p1 = 0.5 + 1 / (8 * math.sqrt(T))
    assert abs(freq1 - p1) <= 3 * math.sqrt(p1 * (1 - p1) / T)
    low = adversary_weed(T, np.random.default_rng(2), lower=True)
    assert np.mean([c(0.75) == 1.0 for c in low]) < 0.5
    with pytest.raises(TooShort):
        adversary_weed(15, np.random.default_rng(0))


# --- configs -----------------------------------------------------------------------


def test_config_errors_name_fields():
    with pytest.raises(ConfigError) as err:
        load_config({"pipeline": "nope", "seeds": [0]})
    assert "pipeline" in err.value.problems
    with pytest.raises(ConfigError) as err:
        load_config({"pipeline": "online_full_info", "seeds": "x", "T": -1, "family": "knapsack"})
    assert {"seeds", "T"} <= set(err.value.problems)
    with pytest.raises(ConfigError) as err:
        load_config({"pipeline": "online_private", "family": "knapsack", "T": 10, "seeds": [0]})
    assert "params/eps" in err.value.problems
    with pytest.raises(ConfigError):
        load_config("{not json")


def test_config_sources(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(MINIMAL))
    assert load_config(p) == MINIMAL
    assert load_config(json.dumps(MINIMAL)) == MINIMAL


def test_run_dir_naming(tmp_path):
    assert run_dir_for({**MINIMAL, "name": "x"}, tmp_path) == tmp_path / "x"
    assert run_dir_for(MINIMAL, tmp_path).name.startswith("online_full_info-")


# --- runs and reports ----------------------------------------------------------------


def test_minimal_run_writes_trajectory(tmp_path):
    summary, run_dir = run_experiment(MINIMAL, tmp_path / "run")
    rows = list(csv.reader(open(run_dir / "trajectory_seed0.csv")))
    assert rows[0] == ["t", "rho", "u_t", "cum_regret"] and len(rows) == 101
    doc = read_summary(run_dir)
    assert doc["per_seed"][0]["regret"] == pytest.approx(float(rows[-1][3]))
    assert doc == json.loads(json.dumps(summary, sort_keys=True))


def test_reruns_are_byte_identical(tmp_path):
    run_experiment(MINIMAL, tmp_path / "a")
    run_experiment(MINIMAL, tmp_path / "b")
    for name in ("trajectory_seed0.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_ledger_gives_header_only_csv(tmp_path):
    led = compute_regret([], [])
    emit_report(tmp_path, {0: led}, None, None,
                {"config": {}, "pipeline": "online_full_info", "aggregate": {}, "checks": []})
    assert (tmp_path / "trajectory_seed0.csv").read_text() == "t,rho,u_t,cum_regret\n"
    assert read_summary(tmp_path)["passed"] is True


@pytest.mark.parametrize("cfg", [
    {"pipeline": "bandit", "family": "pricing_1d", "T": 80, "seeds": [0], "params": {"K": 4}},
    {"pipeline": "private_batch", "family": "knapsack", "T": 10, "seeds": [0, 1]},
    {"pipeline": "dispersion_audit", "family": "mwis", "T": 10, "seeds": [0], "params": {"r": 200}},
    {"pipeline": "online_full_info", "family": "weed", "T": 32, "seeds": [0]},
])
def test_other_pipelines_run(cfg, tmp_path):
    summary, run_dir = run_experiment(cfg, tmp_path / "r")
    assert (run_dir / "summary.json").exists()
    assert summary["pipeline"] == cfg["pipeline"]


# --- CLI -------------------------------------------------------------------------------


def test_cli_run_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({**MINIMAL, "T": 30}))
    out = tmp_path / "out"
    rc = main(["run", str(cfg), "--out", str(out)])
    assert rc in (0, 1) and (out / "summary.json").exists()
    assert main(["report", str(out)]) == rc
    assert "pipeline: online_full_info" in capsys.readouterr().out


def test_cli_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"pipeline": "online_full_info"}))
    assert main(["run", str(cfg)]) == 2
    assert "seeds" in capsys.readouterr().err


def test_cli_extract_curve(tmp_path, capsys):
    inst = tmp_path / "k.json"
    inst.write_text(json.dumps({"family": "knapsack", "n": 3, "values": [0.9, 0.8, 0.7],
                                "sizes": [2, 1, 1], "capacity": 3}))
    assert main(["extract-curve", str(inst), "--B", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"model": "additive", "n": 2, "m": 1, "W": 1.0,
                                "values": [[0.3], [0.6]]}))
    assert main(["extract-curve", str(prof), "--family", "pricing_1d"]) == 0
    assert json.loads(capsys.readouterr().out)


def test_cli_verify_determinism():
    assert main(["verify", "determinism"]) == 0
