"""Structured text serialization of verdicts and certificates.

Payloads are JSON with sorted keys and floats rounded to a fixed number of
significant digits, so equal inputs and seeds give byte-identical output.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math

import numpy as np

from .conic import Verdict
from .ordered import MatrixElement, SpaceElement

SCHEMA_VERSION = 1
FLOAT_DIGITS = 10


def _round(x: float):
    if not math.isfinite(x):
        return str(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.{FLOAT_DIGITS}g}")


def to_plain(obj):
    """Convert verdicts, elements, arrays and dataclasses to JSON-ready data."""
    if isinstance(obj, Verdict):
        return {"status": str(obj.status), "note": obj.note,
                "certificate": {"kind": obj.certificate.kind, "data": to_plain(obj.certificate.data)}}
    if isinstance(obj, SpaceElement):
        return {"labels": list(obj.space.labels), "coeffs": to_plain(obj.coeffs)}
    if isinstance(obj, MatrixElement):
        return {"labels": list(obj.space.labels), "level": obj.level, "coeffs": to_plain(obj.coeffs)}
    if isinstance(obj, enum.Enum):
        return str(obj.value)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if np.allclose(obj.imag, 0.0):
                return to_plain(obj.real)
            return {"re": to_plain(obj.real), "im": to_plain(obj.imag)}
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, complex):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def dumps(payload) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "payload": to_plain(payload)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str):
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return doc["payload"]
