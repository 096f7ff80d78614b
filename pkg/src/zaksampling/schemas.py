"""JSON schemas for the file inputs of the command line tool."""

import jsonschema

_int_vec = {"type": "array", "items": {"type": "integer"}, "minItems": 1}

SPECTRUM = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "type": {"const": "multitile"},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "offsets": {"type": "array", "items": _int_vec, "minItems": 1},
            },
            "required": ["dim", "type", "offsets"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "type": {"const": "raster"},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "grid": {"type": "integer", "minimum": 1},
                "cells": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "index": _int_vec,
                            "offsets": {"type": "array", "items": _int_vec},
                        },
                        "required": ["index", "offsets"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["dim", "type", "grid", "cells"],
            "additionalProperties": False,
        },
    ]
}

GENERATORS = {
    "type": "object",
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "members": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "base_freq": _int_vec,
                    "profile": {
                        "oneOf": [
                            {"const": "indicator"},
                            {
                                "type": "object",
                                "properties": {
                                    "grid": {"type": "integer", "minimum": 1},
                                    "entries": {
                                        "type": "array",
                                        "items": {
                                            "type": "object",
                                            "properties": {
                                                "omega_index": _int_vec,
                                                "offset": _int_vec,
                                                "re": {"type": "number"},
                                                "im": {"type": "number"},
                                            },
                                            "required": ["omega_index", "offset", "re"],
                                            "additionalProperties": False,
                                        },
                                    },
                                },
                                "required": ["grid", "entries"],
                                "additionalProperties": False,
                            },
                        ]
                    },
                },
                "required": ["base_freq", "profile"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["dim", "members"],
    "additionalProperties": False,
}

PATTERN = {
    "type": "object",
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "scale": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": ["integer", "null"]},
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "number", "minimum": -0.5, "maximum": 0.5}},
        },
    },
    "required": ["dim", "points"],
    "additionalProperties": False,
}

EXPERIMENT = {
    "type": "object",
    "properties": {
        "spectrum": SPECTRUM,
        "generators": GENERATORS,
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "m": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}]},
        "m_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "trials": {"type": "integer", "minimum": 1},
        "base_seed": {"type": "integer"},
        "policy": {"type": "string", "pattern": "^(net|per-fingerprint|grid:[0-9]+)$"},
        "inflation": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["alpha", "eps", "trials"],
    "oneOf": [{"required": ["spectrum"]}, {"required": ["generators"]}],
    "additionalProperties": False,
}


def validate(obj, schema, what: str):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"invalid {what} file at {path}: {exc.message}") from None
