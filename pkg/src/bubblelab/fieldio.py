"""Binary field serialization with exact round-trip.

Layout (all little-endian, 8 bytes per entry after the magic):

    magic   b"BBLFLD01"
    version u64
    kind    u64        0 = complex field, 1 = map field (sphere target)
    s_min, s_max       f64
    n_s, n_theta       u64
    center re, im      f64
    extra              f64  (sphere radius for kind 1, else 0)
    rank    u64        number of value axes beyond the grid axes
    dims    u64 * rank
    data    f64 pairs (re, im), row-major over (n_s, n_theta, *dims)
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ConfigError
from .fields import ComplexField, MapField
from .grid import make_grid
from .targets import Sphere

MAGIC = b"BBLFLD01"
VERSION = 1


def dump_field(f, path) -> None:
    """Write a MapField or ComplexField to path."""
    if isinstance(f, MapField):
        if not isinstance(f.target, Sphere):
            raise ConfigError("only sphere-target maps are serializable")
        kind, extra = 1, float(f.target.radius)
        data = f.values.astype(complex)
    elif isinstance(f, ComplexField):
        kind, extra = 0, 0.0
        data = f.values
    else:
        raise ConfigError(f"cannot serialize {type(f).__name__}")
    g = f.grid
    dims = data.shape[2:]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", VERSION, kind))
        fh.write(struct.pack("<dd", g.s_min, g.s_max))
        fh.write(struct.pack("<QQ", g.n_s, g.n_theta))
        fh.write(struct.pack("<dd", g.center.real, g.center.imag))
        fh.write(struct.pack("<d", extra))
        fh.write(struct.pack("<Q", len(dims)))
        for d in dims:
            fh.write(struct.pack("<Q", d))
        pairs = np.empty(data.shape + (2,), dtype="<f8")
        pairs[..., 0] = data.real
        pairs[..., 1] = data.imag
        fh.write(pairs.tobytes(order="C"))


def load_field(path):
    """Read a field written by dump_field; bit-exact values."""
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ConfigError(f"{path}: bad magic")
        version, kind = struct.unpack("<QQ", fh.read(16))
        if version != VERSION:
            raise ConfigError(f"{path}: unsupported version {version}")
        s_min, s_max = struct.unpack("<dd", fh.read(16))
        n_s, n_theta = struct.unpack("<QQ", fh.read(16))
        cre, cim = struct.unpack("<dd", fh.read(16))
        (extra,) = struct.unpack("<d", fh.read(8))
        (rank,) = struct.unpack("<Q", fh.read(8))
        dims = tuple(struct.unpack("<Q", fh.read(8))[0] for _ in range(rank))
        shape = (n_s, n_theta) + dims
        count = int(np.prod(shape, dtype=np.int64)) * 2
        raw = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    pairs = raw.reshape(shape + (2,))
    values = pairs[..., 0] + 1j * pairs[..., 1]
    grid = make_grid(s_min, s_max, n_s, n_theta, complex(cre, cim))
    if kind == 1:
        target = Sphere(ambient_dim=dims[-1], radius=extra)
        return MapField(grid, values.real, target)
    return ComplexField(grid, values)
