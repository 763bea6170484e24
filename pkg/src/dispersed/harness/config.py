"""Experiment configuration: a single JSON document validated against a schema."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ConfigError

__all__ = ["load_schema", "validate_config", "load_config"]

_FAMILY_NEEDED = {"online_full_info", "online_private", "bandit", "private_batch",
                  "rademacher_audit"}


def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def _where(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_config(cfg) -> dict:
    """Return the config unchanged or raise ``ConfigError`` listing every problem by field."""
    validator = jsonschema.Draft202012Validator(load_schema("config"))
    problems: dict[str, list[str]] = {}
    for err in sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path)):
        problems.setdefault(_where(err), []).append(err.message)
    if isinstance(cfg, dict) and not problems:
        pipe = cfg["pipeline"]
        if pipe in _FAMILY_NEEDED and "family" not in cfg:
            problems["family"] = [f"pipeline {pipe!r} needs a family"]
        if pipe in ("online_full_info", "online_private", "bandit", "private_batch") and "T" not in cfg:
            problems["T"] = [f"pipeline {pipe!r} needs T"]
        if pipe == "rademacher_audit" and cfg.get("family", "").startswith("weed"):
            problems["family"] = ["rademacher_audit needs a smoothed family"]
        if pipe == "online_private" and "eps" not in cfg.get("params", {}):
            problems["params/eps"] = ["online_private needs eps"]
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(src) -> dict:
    """Parse a path, JSON string or dict and validate it."""
    if isinstance(src, dict):
        return validate_config(src)
    path = Path(src)
    try:
        text = path.read_text() if path.exists() else str(src)
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError({"<root>": [f"invalid JSON: {exc}"]}) from exc
    return validate_config(cfg)
