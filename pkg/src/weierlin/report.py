"""Deterministic JSON and CSV emission with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, is_dataclass

import numpy as np


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


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
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    if is_dataclass(obj):
        return _encode(asdict(obj), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.number)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and 17 significant digits per float.

    Non-finite floats become ``null``.
    """
    return _encode(obj, indent, 0) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def complex_columns(t, values, prefix: str = "a") -> tuple[list[str], np.ndarray]:
    """Header and matrix for ``t, re(a1), im(a1), ...``."""
    values = np.asarray(values)
    values = values.reshape(len(values), -1)
    header = ["t"]
    cols = [np.asarray(t, dtype=float)]
    for j in range(values.shape[1]):
        header += [f"re_{prefix}{j + 1}", f"im_{prefix}{j + 1}"]
        cols += [values[:, j].real, values[:, j].imag]
    return header, np.column_stack(cols)
