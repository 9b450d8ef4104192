"""Model, table and ray file formats, plus deterministic JSON/CSV output.

Model file (JSON)::

    {"variant": "photon" | "spin1",
     "settings_a": [...], "settings_b": [...],   # radians, or 9 reals per frame
     "p_a": [...], "p_b": [...],                 # optional, default uniform
     "z": [...], "p_z": [...],                   # p_z optional
     "response_f": {"<a-index>": {"<z-index>": outcome}}, "response_g": {...}}

A stochastic model replaces the responses by ``kernel_f``/``kernel_g``, mapping
``a-index -> z-index -> {outcome label: probability}``. Outcome labels are
``0``/``1`` for photons and ``"z1"``/``"z2"``/``"z3"`` (position of the zero)
for spin one.

Table file (JSON)::

    {"variant": ..., "settings_a": [...], "settings_b": [...],
     "cells": [[ [[P(f0,g0), P(f0,g1), ...], ...] per b ] per a]}

``cells[ia][ib]`` is ``null`` for a setting pair without data.

Ray file: one ray per line as three reals; ``#`` starts a comment line.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import InputError
from .kochenspecker import RaySet
from .models import FactorizedModel, StochasticKernelModel, outcomes_for
from .quantum import SPIN1_OUTCOMES, Frame
from .schemas import MODEL_SCHEMA, TABLE_SCHEMA
from .tables import ConditionalTable

SPIN1_LABELS = ("z1", "z2", "z3")


# deterministic serialization


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".eE"):
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits and sorted keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _validate(doc: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{what} schema violation at {where}: {exc.message}") from None


# settings, outcomes, labels


def _setting_from_json(value: Any, variant: str):
    if variant == "photon":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InputError(f"photon settings are angles in radians, got {value!r}")
        return float(value)
    if not isinstance(value, list):
        raise InputError(f"spin-one settings are lists of nine reals, got {value!r}")
    return Frame.from_rows(value)


def _setting_to_json(value: Any):
    return value.rows() if isinstance(value, Frame) else float(value)


def outcome_from_json(value: Any, variant: str):
    if variant == "photon":
        if value in (0, 1) and not isinstance(value, bool):
            return int(value)
        if value in ("0", "1"):
            return int(value)
    else:
        if value in SPIN1_LABELS:
            return SPIN1_OUTCOMES[SPIN1_LABELS.index(value)]
        if isinstance(value, list) and tuple(value) in SPIN1_OUTCOMES:
            return tuple(value)
    raise InputError(f"{value!r} is not a {variant} outcome")


def outcome_to_json(value: Any, variant: str):
    if variant == "photon":
        return int(value)
    return SPIN1_LABELS[SPIN1_OUTCOMES.index(tuple(value))]


def _label(value: Any):
    return tuple(_label(v) for v in value) if isinstance(value, list) else value


def _label_to_json(value: Any):
    return [_label_to_json(v) for v in value] if isinstance(value, tuple) else value


def _indexed(block: Any, n: int, what: str) -> list:
    """Accept ``{"0": x, "1": y}`` or ``[x, y]``; return a list of length n."""
    if isinstance(block, list):
        out = list(block)
    elif isinstance(block, dict):
        try:
            keyed = {int(k): v for k, v in block.items()}
        except ValueError:
            raise InputError(f"{what}: keys must be integer indices") from None
        if sorted(keyed) != list(range(n)):
            raise InputError(f"{what}: expected indices 0..{n - 1}, got {sorted(keyed)}")
        out = [keyed[i] for i in range(n)]
    else:
        raise InputError(f"{what} must be an object or a list")
    if len(out) != n:
        raise InputError(f"{what}: expected {n} entries, got {len(out)}")
    return out


# models


def model_from_dict(doc: dict) -> FactorizedModel | StochasticKernelModel:
    _validate(doc, MODEL_SCHEMA, "model")
    variant = doc["variant"]
    sa = [_setting_from_json(v, variant) for v in doc["settings_a"]]
    sb = [_setting_from_json(v, variant) for v in doc["settings_b"]]
    zs = [_label(v) for v in doc["z"]]
    common = dict(p_a=doc.get("p_a"), p_b=doc.get("p_b"), p_z=doc.get("p_z"))
    if "kernel_f" in doc:
        outcomes = outcomes_for(variant)

        def kernel(block: Any, n: int, what: str) -> np.ndarray:
            arr = np.zeros((n, len(zs), len(outcomes)))
            for ia, row in enumerate(_indexed(block, n, what)):
                for iz, dist in enumerate(_indexed(row, len(zs), f"{what}[{ia}]")):
                    if isinstance(dist, list):
                        arr[ia, iz] = _indexed(dist, len(outcomes), f"{what}[{ia}][{iz}]")
                        continue
                    for label, p in dist.items():
                        arr[ia, iz, outcomes.index(outcome_from_json(label, variant))] = float(p)
            return arr

        return StochasticKernelModel(
            variant, sa, sb, zs,
            kernel(doc["kernel_f"], len(sa), "kernel_f"),
            kernel(doc["kernel_g"], len(sb), "kernel_g"),
            **common,
        )

    def responses(block: Any, n: int, what: str) -> tuple:
        return tuple(
            tuple(outcome_from_json(v, variant) for v in _indexed(row, len(zs), f"{what}[{ia}]"))
            for ia, row in enumerate(_indexed(block, n, what))
        )

    return FactorizedModel(
        variant, sa, sb, zs,
        responses(doc["response_f"], len(sa), "response_f"),
        responses(doc["response_g"], len(sb), "response_g"),
        **common,
    )


def model_to_dict(m: FactorizedModel | StochasticKernelModel) -> dict:
    doc = {
        "variant": m.variant,
        "settings_a": [_setting_to_json(s) for s in m.settings_a],
        "settings_b": [_setting_to_json(s) for s in m.settings_b],
        "p_a": list(m.p_a),
        "p_b": list(m.p_b),
        "z": [_label_to_json(z) for z in m.z],
        "p_z": list(m.p_z),
    }
    if isinstance(m, StochasticKernelModel):
        labels = [str(outcome_to_json(o, m.variant)) for o in m.outcomes]
        for key, k in (("kernel_f", m.kernel_f), ("kernel_g", m.kernel_g)):
            doc[key] = {
                str(i): {str(j): dict(zip(labels, map(float, k[i, j]))) for j in range(k.shape[1])}
                for i in range(k.shape[0])
            }
    else:
        for key, resp in (("response_f", m.response_f), ("response_g", m.response_g)):
            doc[key] = {
                str(i): {str(j): outcome_to_json(v, m.variant) for j, v in enumerate(row)}
                for i, row in enumerate(resp)
            }
    return doc


def load_model(path: str | Path) -> FactorizedModel | StochasticKernelModel:
    return model_from_dict(read_json(path))


# tables


def _table_variant(table: ConditionalTable) -> str:
    return "spin1" if table.outcomes_f == SPIN1_OUTCOMES else "photon"


def table_to_dict(table: ConditionalTable) -> dict:
    variant = _table_variant(table)
    cells = [
        [table.probs[i, j].tolist() if table.present[i, j] else None for j in range(table.shape[1])]
        for i in range(table.shape[0])
    ]
    return {
        "variant": variant,
        "settings_a": [_setting_to_json(s) for s in table.settings_a],
        "settings_b": [_setting_to_json(s) for s in table.settings_b],
        "outcomes": [outcome_to_json(o, variant) for o in table.outcomes_f],
        "cells": cells,
    }


def table_from_dict(doc: dict) -> ConditionalTable:
    _validate(doc, TABLE_SCHEMA, "table")
    variant = doc.get("variant", "photon")
    sa = [_setting_from_json(v, variant) for v in doc["settings_a"]]
    sb = [_setting_from_json(v, variant) for v in doc["settings_b"]]
    outcomes = outcomes_for(variant)
    k = len(outcomes)
    rows = doc["cells"]
    if len(rows) != len(sa) or any(len(r) != len(sb) for r in rows):
        raise InputError("table cells must be indexed [a][b] over the declared settings")
    probs = np.full((len(sa), len(sb), k, k), np.nan)
    present = np.zeros((len(sa), len(sb)), dtype=bool)
    for i, row in enumerate(rows):
        for j, block in enumerate(row):
            if block is None:
                continue
            arr = np.array(block, dtype=float)
            if arr.shape != (k, k):
                raise InputError(f"cells[{i}][{j}] must be a {k}x{k} array")
            probs[i, j] = arr
            present[i, j] = True
    return ConditionalTable(sa, sb, outcomes, outcomes, probs, present)


def load_table(path: str | Path) -> ConditionalTable:
    return table_from_dict(read_json(path))


# rays


def parse_rays(text: str) -> RaySet:
    vectors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"line {lineno}: expected three reals, got {len(parts)} fields")
        try:
            vectors.append([float(p) for p in parts])
        except ValueError:
            raise InputError(f"line {lineno}: not a number in {line!r}") from None
    return RaySet.from_vectors(vectors)


def load_rays(path: str | Path) -> RaySet:
    with open(path, encoding="utf-8") as fh:
        return parse_rays(fh.read())


def format_rays(rays: RaySet, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines += [" ".join(format_float(c) for c in r.components) for r in rays.rays]
    return "\n".join(lines) + "\n"


def scan_csv(thetas, values) -> str:
    rows = ["theta,f,violation"]
    rows += [f"{format_float(float(t))},{format_float(float(v))},{int(v < 0)}" for t, v in zip(thetas, values)]
    return "\n".join(rows) + "\n"
