"""Named experiment configs and the JSON schema every config is checked against."""

from __future__ import annotations

import copy
import hashlib
import json

import jsonschema

from .errors import ConfigurationError

_NOISE = {
    "type": "object",
    "properties": {"eps": {"type": "number", "minimum": 0}, "delta": {"type": "number", "minimum": 0}},
    "additionalProperties": False,
}

_SPACE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["euclidean_box", "euclidean_ball", "finite_explicit", "hamming_cube",
                          "ultrametric_strings", "discrete_uniform"]},
    },
}

_STRATEGY = {"type": "object", "required": ["strategy"], "properties": {"strategy": {"type": "string"}}}

_EVALUATION = {
    "type": "object",
    "properties": {
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "trace_level": {"enum": ["off", "info", "trace"]},
        "certify": {"type": "boolean"},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_boxes": {"type": "integer", "minimum": 1},
        "keep_samples": {"type": "boolean"},
    },
    "additionalProperties": False,
}

GAME_SCHEMA = {
    "type": "object",
    "required": ["space", "rounds", "reconstructor", "responder"],
    "properties": {
        "space": _SPACE,
        "noise": _NOISE,
        "rounds": {"type": "integer", "minimum": 0},
        "reconstructor": _STRATEGY,
        "responder": _STRATEGY,
        "evaluation": _EVALUATION,
    },
    "additionalProperties": False,
}

CURVE_SCHEMA = {
    "type": "object",
    "required": ["T_list"],
    "properties": {
        "T_list": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "reconstructors": {"type": "array", "items": _STRATEGY, "minItems": 1},
        "responders": {"type": "array", "items": _STRATEGY, "minItems": 1},
        "reference": {"type": "number"},
        "log_excess": {"type": "boolean"},
    },
    "additionalProperties": False,
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"type": "string"},
        "game": GAME_SCHEMA,
        "curve": CURVE_SCHEMA,
        "out": {"type": "string"},
        "format": {"type": "array", "items": {"enum": ["csv", "json", "svg"]}},
    },
    "additionalProperties": False,
}


def _box(n: int) -> dict:
    return {"kind": "euclidean_box", "lower": [0.0] * n, "upper": [1.0] * n}


SCENARIOS: dict[str, dict] = {
    "thm1-lb-triangle": {"game": {
        "space": _box(2), "noise": {"eps": 0.0, "delta": 0.05}, "rounds": 1296,
        "reconstructor": {"strategy": "net_cover", "alpha": 0.02},
        "responder": {"strategy": "extremal_set"},
        "evaluation": {"samples": 20000, "seed": 0}}},
    "thm1-sandwich": {"game": {
        "space": _box(2), "noise": {"eps": 0.1, "delta": 0.02}, "rounds": 20164,
        "reconstructor": {"strategy": "net_cover", "alpha": 0.005},
        "responder": {"strategy": "extremal_set"},
        "evaluation": {"samples": 100000, "seed": 3}}},
    "interval-eps0": {"game": {
        "space": _box(1), "noise": {"eps": 0.0, "delta": 0.1}, "rounds": 1,
        "reconstructor": {"strategy": "interval_endpoint"},
        "responder": {"strategy": "honest", "secret": [0.37], "noise_mode": "adversarial-max"},
        "evaluation": {"samples": 2000, "seed": 0}}},
    "interval-shrink": {"game": {
        "space": _box(1), "noise": {"eps": 0.5, "delta": 0.1}, "rounds": 10,
        "reconstructor": {"strategy": "random_baseline"},
        "responder": {"strategy": "interval_shrink", "L0": 1.0},
        "evaluation": {"samples": 2000, "seed": 0}}},
    "translation-eps1": {"game": {
        "space": _box(2), "noise": {"eps": 1.0, "delta": 0.01}, "rounds": 50,
        "reconstructor": {"strategy": "random_baseline"},
        "responder": {"strategy": "simplex_translation"},
        "evaluation": {"samples": 5000, "seed": 0, "certify": False, "keep_samples": True}}},
    "rotation-2d": {"game": {
        "space": _box(2), "noise": {"eps": 0.0, "delta": 0.05}, "rounds": 20,
        "reconstructor": {"strategy": "random_baseline"},
        "responder": {"strategy": "simplex_rotation"},
        "evaluation": {"samples": 5000, "seed": 0, "certify": False, "keep_samples": True}}},
    "trilateration-2d": {"game": {
        "space": _box(2), "noise": {"eps": 0.0, "delta": 0.0}, "rounds": 3,
        "reconstructor": {"strategy": "trilateration"},
        "responder": {"strategy": "honest", "secret": [0.3, 0.8]},
        "evaluation": {"samples": 2000, "seed": 0}}},
    "grid-refinement": {"game": {
        "space": _box(2), "noise": {"eps": 0.2, "delta": 0.0}, "rounds": 54,
        "reconstructor": {"strategy": "grid_refinement"},
        "responder": {"strategy": "honest", "secret": [0.62, 0.31], "noise_mode": "seeded-uniform"},
        "evaluation": {"samples": 20000, "seed": 0, "keep_samples": True}}},
    "ultrametric-12": {"game": {
        "space": {"kind": "ultrametric_strings", "depth": 12}, "rounds": 8,
        "reconstructor": {"strategy": "exhaustive_finite"},
        "responder": {"strategy": "ultrametric_lazy"}}},
    "discrete-constant-one": {"game": {
        "space": {"kind": "discrete_uniform", "count": 10}, "rounds": 5,
        "reconstructor": {"strategy": "exhaustive_finite"},
        "responder": {"strategy": "constant_one"}}},
    "curve-translation-eps1": {
        "game": {"space": _box(2), "noise": {"eps": 1.0, "delta": 0.01}, "rounds": 0,
                 "reconstructor": {"strategy": "random_baseline"},
                 "responder": {"strategy": "simplex_translation"},
                 "evaluation": {"samples": 1000, "seed": 0, "certify": False}},
        "curve": {"T_list": list(range(0, 13)), "reference": 0.017320508075688773, "log_excess": True}},
    "curve-rotation-2d": {
        "game": {"space": _box(2), "noise": {"eps": 0.0, "delta": 0.05}, "rounds": 0,
                 "reconstructor": {"strategy": "random_baseline"},
                 "responder": {"strategy": "simplex_rotation"},
                 "evaluation": {"samples": 1000, "seed": 0, "certify": False}},
        "curve": {"T_list": list(range(0, 6)), "reference": 0.05773502691896258}},
    "curve-interval-eps0": {
        "game": {"space": _box(1), "noise": {"eps": 0.0, "delta": 0.1}, "rounds": 0,
                 "reconstructor": {"strategy": "interval_endpoint"},
                 "responder": {"strategy": "honest", "secret": [0.37], "noise_mode": "adversarial-max"},
                 "evaluation": {"samples": 2000, "seed": 0}},
        "curve": {"T_list": list(range(0, 6)), "reference": 0.1}},
}


def validate_experiment(doc) -> None:
    """Raise ConfigurationError listing every schema violation."""
    validator = jsonschema.Draft202012Validator(EXPERIMENT_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"  at /{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in errors]
        raise ConfigurationError("config failed schema validation:\n" + "\n".join(lines))


def resolve_experiment(doc: dict) -> dict:
    """Fill a ``scenario`` reference with the named defaults, then validate.

    Sections given next to a scenario are partial overrides, so only the merged
    document has to satisfy the schema.
    """
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a JSON object")
    name = doc.get("scenario")
    if not isinstance(name, str):
        validate_experiment(doc)
    if name is not None and name not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    out = copy.deepcopy(SCENARIOS[name]) if name is not None else {}
    for key, value in doc.items():
        if key in ("game", "curve") and key in out:
            out[key].update(copy.deepcopy(value))
        else:
            out[key] = copy.deepcopy(value)
    if "game" not in out:
        raise ConfigurationError("config needs a 'game' section or a known 'scenario'")
    validate_experiment(out)
    return out


def config_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
