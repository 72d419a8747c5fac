"""Config-file schema for the CLI: a single JSON document per run.

Configs are strict: unknown keys anywhere in the document are rejected, so
a typo cannot silently disable a check.  Measures and test functions use
the records
``{"atoms": [[r, w], ...], "density": {"breaks": [...], "values": [...]}}``
and ``{"family": "poly" | "bump", "params": [...]}``.
"""

import json

from .laws import ExpFunctional
from .measures import FiniteMeasure, h_from_record

__all__ = ["ConfigError", "load_config", "validate", "functional_from_record",
           "SCHEMAS"]


class ConfigError(ValueError):
    pass


_MEASURE_SCHEMA = {
    "atoms": list,
    "density": {"breaks": list, "values": list},
}

_FUNCTIONAL_SCHEMA = {
    "id": str,
    "terms": [{"coeff": (int, float), "measure": _MEASURE_SCHEMA}],
}

_H_SCHEMA = {"family": str, "params": list}

_MU_PHI_SCHEMA = {
    "id": str,
    "kind": str,            # exp | gauss | poly_gauss
    "lam": (int, float),
    "c": (int, float),
    "poly": list,
}

SCHEMAS = {
    "verify_mu": {
        "command": str,
        "seed": int,
        "out": str,
        "alphas": list,
        "lambdas": list,
        "test_functions_mu": [_MU_PHI_SCHEMA],
        "tolerance": (int, float),
    },
    "verify_ibpf": {
        "command": str,
        "seed": int,
        "out": str,
        "deltas": list,
        "functionals": [_FUNCTIONAL_SCHEMA],
        "test_functions": [{"id": str, "h": _H_SCHEMA}],
        "mc": {"n_paths": int, "grid_points": int},
        "tolerances": {"route": (int, float), "mc_sigmas": (int, float)},
    },
    "sample": {
        "command": str,
        "seed": int,
        "out": str,
        "deltas": list,
        "marginal_times": list,
        "n_paths": int,
        "grid_points": int,
        "alpha": (int, float),
        "additivity_pairs": list,
        "expectations": [{"id": str, "delta": (int, float),
                          "functional": _FUNCTIONAL_SCHEMA}],
        "dump_paths": {"enabled": bool, "n_paths": int},
    },
    "spde": {
        "command": str,
        "seed": int,
        "out": str,
        "m_interior": int,
        "eps": (int, float),
        "dt": (int, float),
        "t_final": (int, float),
        "replicas": int,
        "burn_in": (int, float),
        "record_stride": int,
        "snapshot_every": int,
        "probe_x": (int, float),
        "drift": bool,
        "drift_mode": str,
        "ks_tolerance": (int, float),
    },
    "distinction": {
        "command": str,
        "seed": int,
        "out": str,
        "sources": [{"id": str, "kind": str, "amplitudes": list,
                     "coeffs": list}],
        "h": _H_SCHEMA,
        "tolerance": (int, float),
        "gap_floor": (int, float),
    },
}


def _validate_node(value, schema, path):
    if isinstance(schema, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        for key in value:
            if key not in schema:
                raise ConfigError(f"{path}: unknown key {key!r}")
        for key, sub in value.items():
            _validate_node(sub, schema[key], f"{path}.{key}")
    elif isinstance(schema, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        for i, item in enumerate(value):
            _validate_node(item, schema[0], f"{path}[{i}]")
    else:
        if not isinstance(value, schema):
            raise ConfigError(f"{path}: expected {schema}, got {type(value).__name__}")


def validate(cfg: dict, command: str) -> dict:
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    declared = cfg.get("command")
    if declared is not None and declared != command:
        raise ConfigError(
            f"config declares command {declared!r} but {command!r} was invoked")
    _validate_node(cfg, SCHEMAS[command], "config")
    return cfg


def load_config(path: str, command: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate(cfg, command)


def functional_from_record(rec: dict) -> ExpFunctional:
    terms = [(t["coeff"], FiniteMeasure.from_record(t["measure"]))
             for t in rec["terms"]]
    return ExpFunctional(terms, label=rec.get("id", ""))


def h_with_id(rec: dict):
    return rec.get("id", rec["h"]["family"]), h_from_record(rec["h"])
