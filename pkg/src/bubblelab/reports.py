"""Report emission: CSV tables (deterministic, 17 significant digits) and a
JSON summary carrying the config echo, package version and stage timings.

CSV is the machine contract: fixed column order, one row per measurement,
byte-identical across reruns with the same seed.  Timings live only in the
JSON summary, which is not covered by the byte-identity guarantee.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import ConfigError

VERSION = "0.1.0"


def format_real(x) -> str:
    """Decimal with 17 significant digits (round-trips float64 exactly)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def write_csv(path, columns, rows) -> None:
    """rows: iterable of dicts keyed by the column names."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c, "")
            if isinstance(v, str):
                if "," in v or "\n" in v:
                    raise ConfigError(f"CSV cell for {c!r} needs quoting; "
                                      f"use plain tokens")
                cells.append(v)
            elif v is None:
                cells.append("")
            else:
                cells.append(format_real(v))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary(path, config_echo: dict, timings: dict,
                  results: dict) -> None:
    doc = {
        "version": VERSION,
        "config": config_echo,
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
        "results": results,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
