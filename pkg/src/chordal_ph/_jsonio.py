"""JSON output with 17 significant digits and an "inf" token for infinity."""
import json
import math
from importlib import resources

import numpy as np


def _encode(obj):
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        if math.isnan(x):
            return '"nan"'
        text = format(x, ".17g")
        if "e" not in text and "." not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """Serialize ``obj``; floats use 17 significant digits, inf becomes "inf"."""
    return _encode(obj)


def _revive(obj):
    if isinstance(obj, dict):
        return {k: _revive(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_revive(v) for v in obj]
    if obj == "inf":
        return math.inf
    if obj == "-inf":
        return -math.inf
    return obj


def loads(text):
    """Inverse of :func:`dumps` (the "inf" strings come back as floats)."""
    return _revive(json.loads(text))


def load_schema(name):
    """The shipped JSON schema for the output of CLI command ``name``."""
    text = resources.files("chordal_ph").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)
