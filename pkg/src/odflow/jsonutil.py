"""Canonical JSON serialization.

Layout documents, service responses and 3D curve exports must be byte-stable:
two runs over the same input produce identical bytes.  Canonical form is
sorted keys, no whitespace, floats rounded to a fixed number of decimals and
serialized through Python's repr (shortest round-trip form), -0.0 normalized.
"""

from __future__ import annotations

import json
import math
from typing import Any

FLOAT_DECIMALS = 6


def _canonical_value(value: Any, decimals: int) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float in canonical JSON: {value!r}")
        v = round(value, decimals)
        if v == 0.0:
            v = 0.0  # normalize -0.0
        return v
    if isinstance(value, dict):
        return {str(k): _canonical_value(v, decimals) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical_value(v, decimals) for v in value]
    return value


def canonical_json(obj: Any, decimals: int = FLOAT_DECIMALS) -> str:
    return json.dumps(
        _canonical_value(obj, decimals),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_json_bytes(obj: Any, decimals: int = FLOAT_DECIMALS) -> bytes:
    return canonical_json(obj, decimals).encode("utf-8")
