"""Deterministic serialization and seed derivation for experiment artifacts.

JSON is written with a fixed field order (insertion order of the dicts
built by the caller) and every float formatted with 17 significant digits,
so that identical runs produce byte-identical files.
"""
import json
import math
from pathlib import Path
import zlib

import numpy as np


def derive_seed(global_seed, stage, task=0):
    """Stable per-task seed from ``(global_seed, stage, task)``.

    ``stage`` and string ``task`` keys are hashed with CRC-32; the triple
    feeds :class:`numpy.random.SeedSequence`, whose first 32-bit state word
    is the derived seed.
    """
    key = [int(global_seed) & 0xFFFFFFFF, zlib.crc32(stage.encode())]
    key.append(zlib.crc32(task.encode()) if isinstance(task, str) else int(task))
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        text = format(v, ".17g")
        if "e" not in text and "." not in text and "inf" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_csv(path, header, rows, config):
    """CSV with a leading ``# config:`` comment line carrying the run config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# config: " + dumps(config, indent=0).replace("\n", ""), ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)
