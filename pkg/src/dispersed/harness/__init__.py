"""Experiment harness: adversaries, pipelines, reports, verification suites and the CLI."""
from .adversaries import FAMILIES, adversary_smoothed, adversary_weed
from .config import load_config, validate_config
from .pipelines import PIPELINES, make_stream, run_experiment
from .report import emit_report, read_summary

__all__ = [
    "FAMILIES",
    "PIPELINES",
    "adversary_smoothed",
    "adversary_weed",
    "emit_report",
    "load_config",
    "make_stream",
    "read_summary",
    "run_experiment",
    "validate_config",
]
