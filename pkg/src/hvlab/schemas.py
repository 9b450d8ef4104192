"""JSON Schemas for input files and for every CLI payload."""

from __future__ import annotations

_num = {"type": "number"}
_prob = {"type": "number", "minimum": 0, "maximum": 1}
_nums = {"type": "array", "items": _num}
_setting = {"anyOf": [_num, {"type": "array", "items": _num, "minItems": 9, "maxItems": 9}]}
_indexed_block = {"type": ["object", "array"]}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["variant", "settings_a", "settings_b", "z"],
    "properties": {
        "variant": {"enum": ["photon", "spin1"]},
        "settings_a": {"type": "array", "items": _setting, "minItems": 1},
        "settings_b": {"type": "array", "items": _setting, "minItems": 1},
        "p_a": _nums,
        "p_b": _nums,
        "z": {"type": "array", "minItems": 1},
        "p_z": _nums,
        "response_f": _indexed_block,
        "response_g": _indexed_block,
        "kernel_f": _indexed_block,
        "kernel_g": _indexed_block,
    },
    "oneOf": [
        {"required": ["response_f", "response_g"], "not": {"anyOf": [{"required": ["kernel_f"]}, {"required": ["kernel_g"]}]}},
        {"required": ["kernel_f", "kernel_g"], "not": {"anyOf": [{"required": ["response_f"]}, {"required": ["response_g"]}]}},
    ],
}

TABLE_SCHEMA = {
    "type": "object",
    "required": ["settings_a", "settings_b", "cells"],
    "properties": {
        "variant": {"enum": ["photon", "spin1"]},
        "settings_a": {"type": "array", "items": _setting, "minItems": 1},
        "settings_b": {"type": "array", "items": _setting, "minItems": 1},
        "outcomes": {"type": "array"},
        "cells": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"anyOf": [{"type": "null"}, {"type": "array", "items": {"type": "array", "items": _prob}}]},
            },
        },
    },
}

_pair_stats = {
    "type": "object",
    "required": ["p11", "p10", "p01", "p00", "mismatch"],
    "properties": {k: _prob for k in ("p11", "p10", "p01", "p00", "mismatch")},
}

_boole = {
    "type": "object",
    "required": ["lhs", "rhs", "slack", "holds"],
    "properties": {"lhs": _num, "rhs": _num, "slack": _num, "holds": {"type": "boolean"}},
}


def _obj(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "required": sorted(required), "properties": props}


_str = {"type": "string"}
_bool = {"type": "boolean"}
_int = {"type": "integer", "minimum": 0}
_table_doc = TABLE_SCHEMA

PAYLOAD_SCHEMAS = {
    "predict photon": _obj(
        {"command": _str, "alpha": _num, "beta": _num, "stats": _pair_stats},
        {"oracle": _pair_stats, "max_abs_diff": _num},
    ),
    "predict spin1": _obj(
        {
            "command": _str,
            "frame_a": _nums,
            "frame_b": _nums,
            "joint": {"type": "array", "items": {"type": "array", "items": _prob}},
            "pairs": {"type": "array", "items": {"type": "array", "items": _pair_stats}},
        },
        {"oracle_joint": {"type": "array"}, "max_abs_diff": _num},
    ),
    "scan-boole": _obj(
        {
            "command": _str,
            "min": _num,
            "max": _num,
            "step": _num,
            "points": _int,
            "violations": _int,
            "min_f": _num,
            "argmin_theta": _num,
            "csv": {"type": ["string", "null"]},
        }
    ),
    "lhv check": _obj(
        {
            "command": _str,
            "variant": _str,
            "holds": _bool,
            "freedom": _obj({"probabilistic": _bool, "surjective": _bool, "residual": _num}),
            "parameter_independence": _bool,
            "reduction_max_abs_diff": _num,
        },
        {
            "boole": _obj({"checked": _int, "min_slack": _num, "holds": _bool}),
            "perfect_correlation": _obj(
                {"holds": _bool, "checked": _int, "skipped": _int},
                {"witness": {"type": ["object", "null"]}},
            ),
        },
    ),
    "lhv table": _obj({"command": _str, "table": _table_doc}),
    "lhv simulate": _obj(
        {
            "command": _str,
            "shots": _int,
            "seed": {"type": "integer"},
            "table": _table_doc,
            "counts": {"type": "array"},
            "max_sigma": _num,
            "within_tolerance": _bool,
        }
    ),
    "polytope": _obj(
        {
            "command": _str,
            "feasible": _bool,
            "residual": _num,
            "weights": {"type": ["array", "null"], "items": _num},
            "strategies": {"type": "array"},
            "boole": _boole,
        }
    ),
    "stochastic check": _obj(
        {
            "command": _str,
            "bell_local": _bool,
            "freedom": _bool,
            "locality_residual": _num,
            "freedom_residual": _num,
        }
    ),
    "stochastic reduce": _obj(
        {
            "command": _str,
            "certified": _bool,
            "max_abs_diff": _num,
            "hidden_values": _int,
            "table": _table_doc,
        },
        {
            "boole": _obj({"checked": _int, "min_slack": _num, "holds": _bool}),
            "polytope_feasible": _bool,
        },
    ),
    "ks color": _obj(
        {
            "colorable": _bool,
            "witness": {"type": ["array", "null"], "items": {"enum": [0, 1]}},
            "nodes": _int,
            "exhausted": _bool,
        },
        {"count": _int, "command": _str, "rays": _int},
    ),
    "ks peres33": _obj(
        {"command": _str, "count": _int, "rays": {"type": "array", "items": _nums}, "emitted": {"type": ["string", "null"]}}
    ),
    "ks obstruction": _obj(
        {
            "command": _str,
            "model_exists": _bool,
            "status": _str,
            "colorings": {"type": "array"},
        },
        {"nodes": _int, "failure": {"type": ["object", "null"]}, "uncovered": {"type": "array"}},
    ),
}
