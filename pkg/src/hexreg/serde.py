"""Deterministic JSON output used by every writer in the package.

Floats are emitted through Python's shortest round-trip repr, which is a
pure function of the double value, and keys are sorted, so identical data
produces byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps_json(data) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True, allow_nan=True) + "\n"


def dump_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(data))
