"""Deterministic JSON and CSV emission.

The stock json module formats floats with shortest-round-trip repr, which
is stable but version-sensitive; reports here are meant to be compared
byte for byte, so floats are always written with 17 significant digits
and dictionaries keep insertion order.
"""

from __future__ import annotations

import json
import math

__all__ = ["dumps", "format_float", "density_csv", "sweep_csv"]


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _encode(obj, parts: list) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                parts.append(", ")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            parts.append(json.dumps(key))
            parts.append(": ")
            _encode(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, value in enumerate(obj):
            if i:
                parts.append(", ")
            _encode(value, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    parts: list = []
    _encode(obj, parts)
    return "".join(parts)


def density_csv(thetas, values) -> str:
    lines = ["theta,density"]
    for t, v in zip(thetas, values):
        lines.append(f"{t:.12g},{v:.12g}")
    return "\n".join(lines) + "\n"


def sweep_csv(rows, header=("dim", "norm")) -> str:
    lines = [",".join(header)]
    for dim, norm in rows:
        lines.append(f"{dim},{norm:.17g}")
    return "\n".join(lines) + "\n"
