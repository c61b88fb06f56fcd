"""Deterministic serialization helpers shared by the CSV/JSON writers."""

import json


def format_float(x: float) -> str:
    """Render a float with 12 significant digits, stable across runs."""
    if x != x:  # NaN
        return "nan"
    return format(float(x), ".12g")


def dump_json(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
