"""Experiment configuration files.

A config is one JSON object with ``"schema": 1``. Every object in it is
closed: unknown keys are rejected rather than ignored, so a typo cannot
silently change an experiment. Example::

    {
      "schema": 1,
      "seed": 7,
      "model": {"family": "two_level", "parameter": 1.0},
      "temperatures": [0.5, 1.0, 2.0]
    }
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from . import spectra
from .errors import ValidationError
from .processes import Adiabatic, Isothermal, Measure, Thermalize
from .spectra import SpectrumModel, levels_at, truncation_count
from .thermo import EntropySurface

SCHEMA_VERSION = 1
SEED_MAX = 2**64 - 1

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NONNEGATIVE = {"type": "number", "minimum": 0}
_SEED = {"type": "integer", "minimum": 0, "maximum": SEED_MAX}

_LEVEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["energy"],
    "properties": {"energy": {"type": "number"}, "degeneracy": {"type": "integer", "minimum": 1}},
}

MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family", "parameter"],
    "properties": {
        "family": {"enum": list(spectra.FAMILIES)},
        "parameter": {"type": "number"},
        "domain": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "ground_degeneracy": {
            "oneOf": [
                {"type": "integer", "minimum": 1},
                {"type": "array", "minItems": 1, "items": {
                    "type": "array", "minItems": 2, "maxItems": 2,
                    "prefixItems": [{"type": "number"}, {"type": "integer", "minimum": 1}]}},
            ]
        },
        "table": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["parameter", "levels"],
                "properties": {
                    "parameter": {"type": "number"},
                    "levels": {"type": "array", "minItems": 2, "items": _LEVEL},
                },
            },
        },
        "count": {"type": "integer", "minimum": 2},
        "max_levels": {"type": "integer", "minimum": 2},
        "t_max": _POSITIVE,
    },
}

_STEP = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["adiabatic", "isothermal", "thermalize", "measure"]},
        "target": {"type": "number"},
        "temperature": _POSITIVE,
        "seed": _SEED,
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "seed": _SEED,
        "output": {"type": "string"},
        "model": MODEL_SCHEMA,
        "temperatures": {"type": "array", "items": _NONNEGATIVE},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["start", "stop", "num"],
            "properties": {"start": _POSITIVE, "stop": _POSITIVE, "num": {"type": "integer", "minimum": 0},
                           "spacing": {"enum": ["log", "linear"]}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"quad_tol": _POSITIVE, "tail_tolerance": {"type": "number", "exclusiveMinimum": 0,
                                                                     "exclusiveMaximum": 1}},
        },
        "staircase": {
            "type": "object",
            "additionalProperties": False,
            "required": ["upper", "lower", "t0"],
            "properties": {"upper": MODEL_SCHEMA, "lower": MODEL_SCHEMA, "t0": _POSITIVE,
                           "t_target": _NONNEGATIVE, "max_steps": {"type": "integer", "minimum": 1}},
        },
        "b2": {
            "type": "object",
            "additionalProperties": False,
            "required": ["alpha", "beta"],
            "properties": {"alpha": MODEL_SCHEMA, "beta": MODEL_SCHEMA, "bracket_max": _POSITIVE},
        },
        "measurement": {
            "type": "object",
            "additionalProperties": False,
            "required": ["temperature", "trials"],
            "properties": {"temperature": _POSITIVE, "trials": {"type": "integer", "minimum": 1},
                           "workers": {"type": "integer", "minimum": 1},
                           "confidence": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                           "t_grid": {"type": "array", "items": _POSITIVE}},
        },
        "harness": {
            "type": "object",
            "additionalProperties": False,
            "required": ["models"],
            "properties": {"models": {"type": "integer", "minimum": 0},
                           "max_steps": {"type": "integer", "minimum": 1},
                           "workers": {"type": "integer", "minimum": 1},
                           "bracket_max": _POSITIVE},
        },
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "required": ["initial_temperature", "steps"],
            "properties": {"initial_temperature": _NONNEGATIVE, "steps": {"type": "array", "items": _STEP}},
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(CONFIG_SCHEMA)


def validate(config: dict) -> dict:
    """Check ``config`` against the schema; raise ``ValidationError`` listing every problem."""
    problems = sorted(_VALIDATOR.iter_errors(config), key=lambda e: list(e.absolute_path))
    if problems:
        text = "; ".join(f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in problems)
        raise ValidationError(f"invalid config: {text}")
    return config


def load(path) -> dict:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    return validate(config)


def require(config: dict, key: str) -> dict:
    if key not in config:
        raise ValidationError(f"config has no {key!r} section")
    return config[key]


def build_model(entry: dict) -> SpectrumModel:
    family = entry["family"]
    domain = tuple(entry.get("domain", spectra.DEFAULT_DOMAIN))
    max_levels = entry.get("max_levels", spectra.DEFAULT_MAX_LEVELS)
    if family == "custom":
        if "table" not in entry:
            raise ValidationError("custom model needs a 'table'")
        table = [(row["parameter"], row["levels"]) for row in entry["table"]]
        model = spectra.custom(table, domain=entry.get("domain"))
    elif family == "degenerate_ground":
        model = spectra.degenerate_ground(entry.get("ground_degeneracy", 2), domain, max_levels)
    elif family == "two_level":
        model = spectra.two_level(domain)
    else:
        model = SpectrumModel(family, domain, max_levels=max_levels)
    if family != "custom" and "table" in entry:
        raise ValidationError(f"'table' is only valid for the custom family, not {family}")
    if family != "degenerate_ground" and "ground_degeneracy" in entry:
        raise ValidationError(f"'ground_degeneracy' is only valid for degenerate_ground, not {family}")
    # fails with DomainError when the parameter is outside the model domain
    levels_at(model, entry["parameter"], 2)
    return model


def tolerances(config: dict) -> tuple[float, float]:
    tol = config.get("tolerances", {})
    return tol.get("quad_tol", 1e-9), tol.get("tail_tolerance", 1e-15)


def build_surface(entry: dict, config: dict) -> EntropySurface:
    model = build_model(entry)
    _, tail = tolerances(config)
    return EntropySurface.from_model(model, entry["parameter"], entry.get("t_max", 100.0), tail, entry.get("count"))


def level_count(entry: dict, model: SpectrumModel, t_max: float, tail: float) -> int:
    if "count" in entry:
        return entry["count"]
    if model.size is not None:
        return model.size
    return truncation_count(model, entry["parameter"], t_max if t_max > 0 else 1.0, tail)


def temperature_grid(config: dict) -> np.ndarray:
    if "temperatures" in config and "grid" in config:
        raise ValidationError("give either 'temperatures' or 'grid', not both")
    if "grid" in config:
        g = config["grid"]
        space = np.linspace if g.get("spacing", "log") == "linear" else np.geomspace
        return space(g["start"], g["stop"], g["num"])
    return np.array(config.get("temperatures", []), dtype=float)


def build_steps(config: dict, seed: int | None):
    steps = []
    for index, step in enumerate(require(config, "protocol")["steps"], start=1):
        kind = step["kind"]
        needed = {"adiabatic": ("target",), "isothermal": ("target",), "thermalize": ("temperature",),
                  "measure": ()}[kind]
        for key in needed:
            if key not in step:
                raise ValidationError(f"protocol step {index} ({kind}) needs {key!r}")
        if kind == "adiabatic":
            steps.append(Adiabatic(step["target"]))
        elif kind == "isothermal":
            steps.append(Isothermal(step["target"], step.get("temperature")))
        elif kind == "thermalize":
            steps.append(Thermalize(step["temperature"]))
        else:
            if "seed" in step:
                steps.append(Measure(step["seed"]))
            elif seed is not None:
                steps.append(Measure(np.random.SeedSequence(seed, spawn_key=(index,))))
            else:
                raise ValidationError(f"protocol step {index} measures but no seed is configured")
    return steps
