"""Cauchy transform g = (1/(pi z)) * f, the right inverse of d/dzbar.

The convolution runs on a uniform Cartesian auxiliary grid.  The source is
treated as piecewise constant per cell and the kernel 1/(pi z) is integrated
in closed form over each displacement cell: with Psi(z) = -i (z ln z - z)
one has d^2 Psi / dx dy = 1/z, so the integral over an axis-aligned square S
is the mixed corner difference of Psi.  The linear-in-z parts of Psi cancel
in that difference, which removes any branch issue (cells never contain the
origin, and z/d stays in the right half plane on the cell around d); the
singular cell integrates to exactly zero by symmetry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import ConfigError
from .fields import ComplexField, _interp_components, _source_indices
from .grid import LogPolarGrid

__all__ = ["CartesianGrid", "cauchy_transform", "cartesian_cauchy",
           "sample_to_cartesian", "sample_from_cartesian"]

DEFAULT_RESOLUTION = 1024


@dataclass(frozen=True)
class CartesianGrid:
    """Square n x n grid of cell centers covering [-half, half]^2."""

    n: int
    half: float

    @property
    def h(self) -> float:
        return 2.0 * self.half / self.n

    def axes(self) -> np.ndarray:
        return -self.half + (np.arange(self.n) + 0.5) * self.h

    def nodes(self) -> np.ndarray:
        ax = self.axes()
        return ax[None, :] + 1j * ax[:, None]   # [row=y, col=x]


@lru_cache(maxsize=3)
def _kernel_fft(n: int, h: float) -> np.ndarray:
    """FFT of the cell-integrated Cauchy kernel on the (2n) padded lattice."""
    m = 2 * n
    idx = np.fft.fftfreq(m, d=1.0 / m)  # 0, 1, ..., -1 displacement order
    d = h * (idx[None, :] + 1j * idx[:, None])

    def corner(sx, sy):
        z = d + 0.5 * h * (sx + 1j * sy)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z * np.log(z / np.where(d == 0, 1.0, d))
        return out

    integral = (corner(+1, +1) - corner(-1, +1)
                - corner(+1, -1) + corner(-1, -1))
    K = (-1j / np.pi) * integral
    K[0, 0] = 0.0  # singular cell: odd kernel over a symmetric cell
    return np.fft.fft2(K)


def cartesian_cauchy(values: np.ndarray, cart: CartesianGrid) -> np.ndarray:
    """Convolution of Cartesian cell data (y, x[, ...]) with 1/(pi z)."""
    n = cart.n
    if values.shape[:2] != (n, n):
        raise ConfigError("cartesian_cauchy: values do not match the grid")
    Khat = _kernel_fft(n, cart.h)
    flat = values.reshape(n, n, -1)
    out = np.empty_like(flat, dtype=complex)
    buf = np.zeros((2 * n, 2 * n), dtype=complex)
    for c in range(flat.shape[2]):
        buf[:n, :n] = flat[:, :, c]
        conv = np.fft.ifft2(np.fft.fft2(buf) * Khat)
        out[:, :, c] = conv[:n, :n]
        buf[:n, :n] = 0.0
    return out.reshape(values.shape)


def sample_to_cartesian(f: ComplexField, cart: CartesianGrid,
                        supersample: int = 1,
                        support_tol: float = 1e-6) -> np.ndarray:
    """Cell values of f on the Cartesian grid (cell means if supersample>1).

    Points inside the grid's inner hole continue the innermost ring values;
    points beyond the outer edge are zero.  A warning is issued when the
    field has not decayed at the outer edge (truncated support).
    """
    g = f.grid
    outer_mag = float(np.max(np.abs(f.values[-1])))
    scale = float(np.max(np.abs(f.values))) + 1e-300
    if outer_mag > support_tol * scale:
        warnings.warn(
            f"cauchy source not compactly supported: outer-ring magnitude "
            f"{outer_mag:.3e} vs field scale {scale:.3e}", stacklevel=2)

    ss = max(1, int(supersample))
    n = cart.n
    ax = cart.axes()
    if ss == 1:
        pts = (ax[None, :] + 1j * ax[:, None]).ravel()
    else:
        off = (np.arange(ss) + 0.5) / ss - 0.5
        sub = ax[:, None] + off[None, :] * cart.h
        sub = sub.ravel()
        pts = (sub[None, :] + 1j * sub[:, None]).ravel()

    w = pts - g.center
    rr = np.abs(w)
    rr_safe = np.clip(rr, g.r_inner * np.exp(0.5 * g.ds), None)
    s = np.log(rr_safe)
    s = np.clip(s, g.s[0], g.s[-1])
    theta = np.mod(np.angle(w), 2.0 * np.pi)
    si = (s - g.s[0]) / g.ds
    ti = theta / g.dtheta
    vals = _interp_components(f.values, si, ti)
    vals = np.where(
        (rr > g.r_outer).reshape(rr.shape + (1,) * (vals.ndim - 1)),
        0.0, vals)
    if ss == 1:
        return vals.reshape((n, n) + f.values.shape[2:])
    full = vals.reshape((n * ss, n * ss) + f.values.shape[2:])
    blocks = full.reshape((n, ss, n, ss) + f.values.shape[2:])
    return blocks.mean(axis=(1, 3))


def sample_from_cartesian(values: np.ndarray, cart: CartesianGrid,
                          grid: LogPolarGrid) -> ComplexField:
    """Bicubic sample of Cartesian cell data onto a log-polar grid."""
    z = grid.nodes
    xi = (z.real + cart.half) / cart.h - 0.5
    yi = (z.imag + cart.half) / cart.h - 0.5
    coords = np.stack([yi, xi])
    flat = np.asarray(values).reshape(cart.n, cart.n, -1)
    comps = []
    for c in range(flat.shape[2]):
        plane = flat[:, :, c]
        re = map_coordinates(plane.real, coords, order=3, mode="nearest")
        im = map_coordinates(plane.imag, coords, order=3, mode="nearest")
        comps.append(re + 1j * im)
    out = np.stack(comps, axis=-1).reshape(z.shape + values.shape[2:])
    return ComplexField(grid, out)


def cauchy_transform(f: ComplexField, eval_grid: LogPolarGrid | None = None,
                     resolution: int = DEFAULT_RESOLUTION,
                     domain_half: float | None = None,
                     supersample: int = 1) -> ComplexField:
    """g with dzbar g = f (distributionally), sampled on eval_grid.

    f must be supported compactly inside its grid; the Cartesian domain is
    sized to contain both the support and the evaluation nodes.
    """
    if eval_grid is None:
        eval_grid = f.grid
    if domain_half is None:
        domain_half = 1.02 * max(abs(f.grid.center) + f.grid.r_outer,
                                 abs(eval_grid.center) + eval_grid.r_outer)
    cart = CartesianGrid(int(resolution), float(domain_half))
    data = sample_to_cartesian(f, cart, supersample=supersample)
    conv = cartesian_cauchy(data, cart)
    return sample_from_cartesian(conv, cart, eval_grid)
