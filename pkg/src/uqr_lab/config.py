"""Run configuration: JSON schema, validation, defaults, map construction."""

from __future__ import annotations

import copy
import json
import os

import jsonschema

from .dynamics import SHEAR_PROFILES, ShearedEndo, SpherePowerMap, ToralEndo
from .errors import ConfigError

__all__ = ["CONFIG_SCHEMA", "EXPERIMENTS", "load_config", "resolve_config",
           "build_map", "validate_config"]

EXPERIMENTS = [
    "entropy-top",
    "entropy-measure",
    "balanced-measure",
    "chain-volume",
    "ahlfors-scan",
    "bihari-selftest",
    "audit-all",
]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uqr-lab run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "seed", "output_dir"],
    "properties": {
        "experiment": {"enum": EXPERIMENTS},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_dir": {"type": "string", "minLength": 1},
        "figures": {"type": "boolean"},
        "export_atoms": {"type": "boolean"},
        "threads": {"type": ["integer", "null"], "minimum": 1},
        "map": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": ["toral", "sphere_power", "sheared"]},
                "matrix": {
                    "type": "array", "minItems": 2,
                    "items": {"type": "array", "minItems": 2,
                              "items": {"type": "integer"}},
                },
                "exponent": {"type": "integer", "minimum": 2},
                "shear_amplitude": {"type": "number", "minimum": 0},
                "shear_profile": {"enum": sorted(SHEAR_PROFILES)},
            },
        },
        "budgets": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid_resolution": {"type": "integer", "minimum": 2},
                "base_samples": {"type": "integer", "minimum": 10},
                "k_range": {"type": "array", "minItems": 3,
                            "items": {"type": "integer", "minimum": 1}},
                "eps_schedule": {"type": "array", "minItems": 3,
                                 "items": {"type": "number",
                                           "exclusiveMinimum": 0}},
                "radii": {"type": "array", "minItems": 2,
                          "items": {"type": "number", "exclusiveMinimum": 0}},
                "mc_samples": {"type": "integer", "minimum": 1000},
                "center_samples": {"type": "integer", "minimum": 10},
                "tree_depth": {"type": "integer", "minimum": 0},
                "tree_samples": {"type": "integer", "minimum": 1},
                "atom_cap": {"type": "integer", "minimum": 1000},
                "partition_depth": {"type": "integer", "minimum": 1},
                "ks_kmax": {"type": "integer", "minimum": 1},
                "ks_atoms": {"type": "integer", "minimum": 1000},
                "distortion_samples": {"type": "integer", "minimum": 100},
                "chain_k": {"type": "integer", "minimum": 1},
                "box_depth": {"type": "integer", "minimum": 1},
                "residual_cutoff": {"type": "integer", "minimum": 1},
                "bihari_instances": {"type": "integer", "minimum": 1},
                "bihari_points": {"type": "integer", "minimum": 16},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "ks": {"type": "number", "exclusiveMinimum": 0},
                "audit": {"type": "number", "exclusiveMinimum": 0},
                "slope": {"type": "number", "exclusiveMinimum": 0},
                "spread": {"type": "number", "exclusiveMinimum": 0},
                "residual": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

DEFAULT_BUDGETS = {
    "grid_resolution": 512,
    "base_samples": 100_000,
    "k_range": [1, 2, 3, 4, 5, 6],
    "eps_schedule": [0.2, 0.1, 0.05],
    "radii": [0.3, 0.17, 0.1, 0.056, 0.031, 0.018, 0.01],
    "mc_samples": 4000,
    "center_samples": 10,
    "tree_depth": 6,
    "tree_samples": 10_000,
    "atom_cap": 10_000_000,
    "partition_depth": 4,
    "ks_kmax": 4,
    "ks_atoms": 1_000_000,
    "distortion_samples": 2000,
    "chain_k": 3,
    "box_depth": 2,
    "residual_cutoff": 2,
    "bihari_instances": 100,
    "bihari_points": 200,
}

DEFAULT_TOLERANCES = {
    "h": 0.15,
    "ks": 0.15,
    "audit": 0.1,
    "slope": 0.2,
    "spread": 10.0,
    "residual": 0.02,
}

_NEEDS_MAP = {e for e in EXPERIMENTS if e != "bihari-selftest"}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return raw


def validate_config(raw: dict) -> None:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected: {exc.message}") from exc
    exp = raw["experiment"]
    if exp in _NEEDS_MAP and "map" not in raw:
        raise ConfigError(f"experiment {exp!r} requires a map specification")
    if "map" in raw:
        build_map(raw["map"])  # raises ConfigError on bad parameters


def resolve_config(raw: dict) -> dict:
    """Validated config with defaults filled and the env seed override applied."""
    validate_config(raw)
    cfg = copy.deepcopy(raw)
    env_seed = os.environ.get("UQR_LAB_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"UQR_LAB_SEED is not an integer: {env_seed!r}") from exc
    budgets = dict(DEFAULT_BUDGETS)
    budgets.update(cfg.get("budgets", {}))
    cfg["budgets"] = budgets
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(cfg.get("tolerances", {}))
    cfg["tolerances"] = tols
    cfg.setdefault("figures", True)
    cfg.setdefault("export_atoms", False)
    if cfg.get("threads") is None:
        cfg["threads"] = os.cpu_count()  # determinism does not depend on it
    eps = cfg["budgets"]["eps_schedule"]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_schedule must be strictly decreasing")
    return cfg


def build_map(map_spec: dict):
    family = map_spec.get("family")
    try:
        if family == "toral":
            if "matrix" not in map_spec:
                raise ConfigError("toral map needs a matrix")
            return ToralEndo(map_spec["matrix"])
        if family == "sphere_power":
            if "exponent" not in map_spec:
                raise ConfigError("sphere_power map needs an exponent")
            return SpherePowerMap(map_spec["exponent"])
        if family == "sheared":
            if "matrix" not in map_spec:
                raise ConfigError("sheared map needs a base matrix")
            base = ToralEndo(map_spec["matrix"])
            return ShearedEndo(base, map_spec.get("shear_amplitude", 0.1),
                               map_spec.get("shear_profile", "sine"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown map family {family!r}")
