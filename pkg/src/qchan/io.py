"""JSON and CSV serialization.

Matrix schema::

    {"rows": r, "cols": c, "entries": [[re, im], ...]}   # row-major

Kraus-set schema::

    {"dim_in": n, "dim_out": m, "operators": [matrix, ...], "label": "..."}

Output is written with a small dedicated encoder: keys keep insertion order
and every float is printed with 17 significant digits, so equal inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

from .channels import KrausSet
from .errors import MalformedInput


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise MalformedInput(f"{where}: expected an object, got {type(obj).__name__}")
    for key in ("rows", "cols", "entries"):
        if key not in obj:
            raise MalformedInput(f"{where}: missing field {key!r}")
    rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
        raise MalformedInput(f"{where}: rows/cols must be positive integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise MalformedInput(
            f"{where}.entries: expected {rows * cols} entries, got "
            f"{len(entries) if isinstance(entries, list) else type(entries).__name__}"
        )
    out = np.empty(rows * cols, dtype=complex)
    for i, e in enumerate(entries):
        if (
            not isinstance(e, (list, tuple))
            or len(e) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in e)
        ):
            raise MalformedInput(f"{where}.entries[{i}]: expected [re, im]")
        if not all(math.isfinite(v) for v in e):
            raise MalformedInput(f"{where}.entries[{i}]: non-finite value")
        out[i] = complex(e[0], e[1])
    return out.reshape(rows, cols)


def kraus_to_json(k: KrausSet) -> dict:
    return {
        "dim_in": k.dim_in,
        "dim_out": k.dim_out,
        "operators": [matrix_to_json(op) for op in k.operators],
        "label": k.label,
    }


def kraus_from_json(obj, where: str = "kraus", trace_preserving: bool = True) -> KrausSet:
    if not isinstance(obj, dict) or "operators" not in obj:
        raise MalformedInput(f"{where}: expected an object with 'operators'")
    ops_json = obj["operators"]
    if not isinstance(ops_json, list) or not ops_json:
        raise MalformedInput(f"{where}.operators: expected a non-empty list")
    ops = [matrix_from_json(m, f"{where}.operators[{i}]") for i, m in enumerate(ops_json)]
    for key, axis in (("dim_out", 0), ("dim_in", 1)):
        if key in obj and any(op.shape[axis] != obj[key] for op in ops):
            raise MalformedInput(f"{where}.{key}: does not match operator shapes")
    if len({op.shape for op in ops}) != 1:
        raise MalformedInput(f"{where}.operators: operators have different shapes")
    return KrausSet(ops, label=str(obj.get("label", "")), trace_preserving=trace_preserving)


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise MalformedInput(f"{path}: {exc.strerror}") from exc


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
