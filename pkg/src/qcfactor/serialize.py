"""JSON and CSV writers that print every float with 17 significant digits."""

from __future__ import annotations

import io
import json
import math
import re

import numpy as np

__all__ = ["fmt", "dumps", "write_csv"]

_TOKEN = "@@f17@@"
_PATTERN = re.compile(r'"' + re.escape(_TOKEN) + r'([^"]*)"')


def fmt(value: float) -> str:
    """``%.17g`` formatting; non-finite values become ``nan``/``inf``/``-inf``."""
    value = float(value) + 0.0  # folds -0.0 into 0.0
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_prepare(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(float(obj)):
            return None
        return _TOKEN + fmt(obj)
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """``json.dumps`` with floats as bare 17-digit numbers and NaN/inf as null."""
    text = json.dumps(_prepare(obj), indent=indent, sort_keys=False)
    return _PATTERN.sub(lambda m: m.group(1), text)


def write_csv(target, header, columns) -> str | None:
    """Write equal-length ``columns`` under ``header``.

    ``target`` is a path, a text stream or None (return the text).
    """
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return None
