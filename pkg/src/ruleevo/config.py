"""JSON run configuration.

Schema (every key optional except ``env``; unknown keys are rejected)::

    {
      "env": "cartpole" | "mountaincar" | "acrobot",
      "seed": 0,
      "workers": 1,
      "engine": {"population": 200, "generations": 500, "eval_episodes": 5,
                 "complexity_penalty": 0.1, "elite_fraction": 0.25,
                 "early_stop_threshold": null, "elite_source": "archive",
                 "cache_elite_fitness": false, "fallback_action": 0},
      "variation": {"max_rules": 6, "max_predicates_per_rule": 3,
                    "p_mut": 0.3, "p_cross": 0.7,
                    "mutation_kind_weights": [0.5, 0.2, 0.15, 0.15],
                    "threshold_count": 41},
      "archive": {"threshold_bins": 16, "threshold_max": null}
    }

``early_stop_threshold: null`` uses the environment's solve threshold and
``threshold_max: null`` the largest |threshold| in the threshold grids.
"""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .engine import RunConfig
from .errors import ConfigError

TOP_LEVEL = {"env": "env_name", "seed": "run_seed", "workers": "workers"}
SECTIONS: dict[str, dict[str, str]] = {
    "engine": {
        "population": "population",
        "generations": "generations",
        "eval_episodes": "eval_episodes",
        "complexity_penalty": "complexity_penalty",
        "elite_fraction": "elite_fraction",
        "early_stop_threshold": "early_stop_threshold",
        "elite_source": "elite_source",
        "cache_elite_fitness": "cache_elite_fitness",
        "fallback_action": "fallback_action",
    },
    "variation": {
        "max_rules": "max_rules",
        "max_predicates_per_rule": "max_predicates_per_rule",
        "p_mut": "p_mut",
        "p_cross": "p_cross",
        "mutation_kind_weights": "mutation_kind_weights",
        "threshold_count": "threshold_count",
    },
    "archive": {
        "threshold_bins": "threshold_bins",
        "threshold_max": "threshold_max",
    },
}

_INT_FIELDS = {"population", "generations", "eval_episodes", "max_rules", "max_predicates_per_rule",
               "threshold_count", "threshold_bins", "fallback_action", "run_seed", "workers"}
_FLOAT_FIELDS = {"complexity_penalty", "elite_fraction", "p_mut", "p_cross"}
_OPT_FLOAT_FIELDS = {"early_stop_threshold", "threshold_max"}


def shipped_config(name: str) -> Path | None:
    stem = name[:-5] if name.endswith(".json") else name
    ref = resources.files("ruleevo") / "configs" / f"{stem}.json"
    return Path(str(ref)) if ref.is_file() else None


def load_config(path: str | Path) -> dict:
    """Read a config file; a bare name like ``cartpole.json`` falls back to the shipped configs."""
    p = Path(path)
    if not p.is_file():
        shipped = shipped_config(str(path))
        if shipped is None:
            raise ConfigError(f"config file not found: {path}")
        p = shipped
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: config must be a JSON object")
    return doc


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, overrides: Iterable[str]) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as JSON when possible."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        parts = key.split(".")
        if len(parts) == 1:
            if parts[0] not in TOP_LEVEL:
                raise ConfigError(f"unknown config key {key!r}")
            doc[parts[0]] = _parse_value(raw)
        elif len(parts) == 2:
            section, name = parts
            if section not in SECTIONS or name not in SECTIONS[section]:
                raise ConfigError(f"unknown config key {key!r}")
            doc.setdefault(section, {})[name] = _parse_value(raw)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return doc


def _coerce(field: str, value: Any) -> Any:
    if field in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{field} must be an integer, got {value!r}")
        return value
    if field in _FLOAT_FIELDS or (field in _OPT_FLOAT_FIELDS and value is not None):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{field} must be a number, got {value!r}")
        return float(value)
    if field == "cache_elite_fitness":
        if not isinstance(value, bool):
            raise ConfigError(f"{field} must be true or false")
        return value
    if field == "mutation_kind_weights":
        if not isinstance(value, list) or len(value) != 4:
            raise ConfigError("mutation_kind_weights must be a list of 4 numbers")
        return tuple(float(v) for v in value)
    if field in ("env_name", "elite_source") and not isinstance(value, str):
        raise ConfigError(f"{field} must be a string")
    return value


def run_config_from_dict(doc: dict) -> RunConfig:
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key in TOP_LEVEL:
            kwargs[TOP_LEVEL[key]] = _coerce(TOP_LEVEL[key], value)
        elif key in SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be an object")
            for name, v in value.items():
                if name not in SECTIONS[key]:
                    raise ConfigError(f"unknown config key '{key}.{name}'")
                field = SECTIONS[key][name]
                kwargs[field] = _coerce(field, v)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "env_name" not in kwargs:
        raise ConfigError("config must name an env")
    return RunConfig(**kwargs)


def run_config_to_dict(cfg: RunConfig) -> dict:
    """Nested document that ``run_config_from_dict`` maps back to ``cfg``.

    ``workers`` is left out: it never changes results, and the echo must be
    identical across worker counts."""
    flat = cfg.to_dict()
    doc: dict[str, Any] = {key: flat[field] for key, field in TOP_LEVEL.items() if key != "workers"}
    for section, names in SECTIONS.items():
        doc[section] = {name: flat[field] for name, field in names.items()}
    return doc
