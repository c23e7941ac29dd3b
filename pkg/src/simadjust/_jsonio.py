"""Byte-deterministic JSON output.

The stdlib C encoder bypasses ``__repr__`` on float subclasses and formats
floats with ``repr`` semantics, which is stable but not what we promise:
every float is emitted with 17 significant digits so output is identical
across platforms and re-runs. Rationals are emitted as "p/q" strings. Key
order is insertion order, never sorted.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

__all__ = ["dumps"]


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out)


def _emit(o, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if o is None:
        out.append("null")
    elif isinstance(o, bool):
        out.append("true" if o else "false")
    elif isinstance(o, int):
        out.append(str(o))
    elif isinstance(o, float):
        out.append(_format_float(o))
    elif isinstance(o, Fraction):
        out.append(f'"{o}"')
    elif isinstance(o, str):
        out.append(json.dumps(o))
    elif isinstance(o, dict):
        if not o:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(o.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(pad)
            out.append(json.dumps(key))
            out.append(": ")
            _emit(value, out, indent, level + 1)
            out.append(",\n" if i < len(o) - 1 else "\n")
        out.append(close_pad + "}")
    elif isinstance(o, (list, tuple)):
        if not o:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(o):
            out.append(pad)
            _emit(value, out, indent, level + 1)
            out.append(",\n" if i < len(o) - 1 else "\n")
        out.append(close_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(o).__name__} to JSON")


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no literals for these; make the pathology visible
        return json.dumps(str(x))
    return format(x, ".17g")
