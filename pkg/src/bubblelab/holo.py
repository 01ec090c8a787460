"""Holomorphic approximation of the Hopf differential.

Laurent analysis on annuli (theta-Fourier transform per grid circle,
averaged radially), closed-form monomial norms, projection onto the
nonnegative modes, the mollify-and-correct projection onto holomorphic
functions on disks, and the negative-coefficient diagnostics with their
theoretical bound ratios.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from .cauchy import CartesianGrid, cartesian_cauchy
from .errors import ConfigError, PreconditionError
from .fields import ComplexField, _interp_components, differentiate
from .grid import LogPolarGrid, Region, integrate, make_grid

__all__ = ["LaurentSeries", "laurent_coefficients", "monomial_norm",
           "project_annulus", "mollify_project", "neck_diagnostics",
           "NeckDiagnostics", "MollifyResult", "AnnulusProjection"]


# ---------------------------------------------------------------------------
# Laurent analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentSeries:
    """Coefficients b_n of f = sum b_n (z - center)^n on an annulus.

    coefficients[i] belongs to order orders[i]; vector-valued sources give
    vector coefficients.  spread[i] records the variation of the contour
    integral across the radii used (a holomorphy diagnostic).
    """

    orders: np.ndarray
    coefficients: np.ndarray
    spread: np.ndarray
    center: complex
    r_in: float
    r_out: float

    def coefficient(self, n: int) -> np.ndarray:
        idx = np.where(self.orders == n)[0]
        if len(idx) == 0:
            raise ConfigError(f"order {n} outside the extracted range")
        return self.coefficients[idx[0]]

    def evaluate(self, z: np.ndarray, orders=None) -> np.ndarray:
        """Sum of the (selected) terms at points z (absolute coordinates)."""
        w = np.asarray(z) - self.center
        sel = self.orders if orders is None else np.asarray(orders)
        out = None
        for n in sel:
            c = self.coefficient(int(n))
            term = np.multiply.outer(w**int(n), c) if c.ndim else c * w**int(n)
            out = term if out is None else out + term
        if out is None:
            out = np.zeros(w.shape, dtype=complex)
        return out

    def truncate(self, keep) -> "LaurentSeries":
        mask = np.isin(self.orders, np.asarray(list(keep)))
        return LaurentSeries(self.orders[mask], self.coefficients[mask],
                             self.spread[mask], self.center,
                             self.r_in, self.r_out)


def laurent_coefficients(f: ComplexField, region: Region,
                         n_min: int, n_max: int) -> LaurentSeries:
    """b_n = (1/2 pi i) oint f(z) (z-c)^{-n-1} dz via theta-Fourier modes.

    Uses every grid circle inside the annular region, then averages the
    middle 50% of radii; the spread across those radii is recorded per
    order.  The annulus must be concentric with f's grid.
    """
    grid = f.grid
    if abs(region.center - grid.center) > 1e-12:
        raise ConfigError("laurent_coefficients needs a grid-concentric "
                          "annulus")
    if n_max - n_min < 0:
        raise ConfigError("empty order range")
    if max(abs(n_min), abs(n_max)) > grid.n_theta // 4:
        raise ConfigError(
            f"orders up to {max(abs(n_min), abs(n_max))} exceed the "
            f"resolvable theta modes ({grid.n_theta // 4})")
    rows = np.where((grid.r >= region.r_in) & (grid.r < region.r_out))[0]
    if len(rows) < 4:
        raise ConfigError("annulus too thin: fewer than 4 grid circles")
    lo = rows[0] + len(rows) // 4
    hi = rows[0] + (3 * len(rows)) // 4
    rows = np.arange(lo, max(hi, lo + 1))

    vals = f.values[rows]
    fhat = np.fft.fft(vals, axis=1) / grid.n_theta
    orders = np.arange(n_min, n_max + 1)
    coeffs = np.empty((len(orders),) + f.values.shape[2:], dtype=complex)
    spreads = np.empty(len(orders))
    r = grid.r[rows]
    for i, n in enumerate(orders):
        mode = fhat[:, n % grid.n_theta]
        per_radius = mode / (r.reshape((-1,) + (1,) * (mode.ndim - 1)) ** n)
        coeffs[i] = per_radius.mean(axis=0)
        dev = np.abs(per_radius - coeffs[i])
        while dev.ndim > 1:
            dev = dev.max(axis=-1)
        spreads[i] = float(dev.max())
    return LaurentSeries(orders, coeffs, spreads, grid.center,
                         float(np.exp(grid.s[rows[0]] - grid.ds / 2)),
                         float(np.exp(grid.s[rows[-1]] + grid.ds / 2)))


def monomial_norm(n: int, rho1: float, rho2: float,
                  squared: bool = False) -> float:
    """Closed-form L^2 norm of z^n on the annulus D_rho1 \\ D_rho2.

    ||z^n||^2 = pi (rho1^{2n+2} - rho2^{2n+2}) / (n+1)  for n != -1,
    and  2 pi ln(rho1/rho2)  for n = -1.
    """
    if not (0.0 < rho2 < rho1):
        raise ConfigError("need 0 < rho2 < rho1")
    if n == -1:
        sq = 2.0 * np.pi * np.log(rho1 / rho2)
    else:
        sq = np.pi * (rho1 ** (2 * n + 2) - rho2 ** (2 * n + 2)) / (n + 1)
    return float(sq) if squared else float(np.sqrt(sq))


@dataclass(frozen=True)
class AnnulusProjection:
    series: LaurentSeries           # the nonnegative modes only
    error_l1: float                 # ||h - h0||_{L^1(annulus)}
    negative_ledger: dict           # {n: |b_n|} for the dropped modes


def project_annulus(h: ComplexField, region: Region,
                    n_max: int | None = None) -> AnnulusProjection:
    """Drop the negative Laurent modes of h over the annulus.

    Returns the nonnegative series, the L^1 distance to it over the
    annulus, and the magnitude ledger of the dropped coefficients.
    """
    grid = h.grid
    if n_max is None:
        n_max = grid.n_theta // 4
    series = laurent_coefficients(h, region, -n_max, n_max)
    nonneg = series.truncate([n for n in series.orders if n >= 0])
    h0 = nonneg.evaluate(grid.nodes)
    err = integrate(grid, np.abs(h.values - h0), region)
    ledger = {int(n): float(np.abs(series.coefficient(int(n))).max())
              for n in series.orders if n < 0}
    return AnnulusProjection(nonneg, float(err), ledger)


# ---------------------------------------------------------------------------
# mollify-and-correct projection (disk version)
# ---------------------------------------------------------------------------

def _bump_kernel(cart_h: float, r: float) -> np.ndarray:
    """Radial bump phi_(r) = (16/pi) r^{-2} (1 - 4|x/r|^2)^3 on D_{r/2},
    sampled on the Cartesian lattice and normalized to exact unit mass."""
    m = int(np.ceil(0.5 * r / cart_h)) + 2
    ax = np.arange(-m, m + 1) * cart_h
    rr2 = (ax[None, :] ** 2 + ax[:, None] ** 2) / r**2
    phi = np.where(4.0 * rr2 < 1.0, (1.0 - np.clip(4 * rr2, 0, 1)) ** 3, 0.0)
    mass = phi.sum() * cart_h**2
    if mass <= 0:
        raise ConfigError("mollification radius below grid resolution")
    return phi / mass * cart_h**2   # discrete convolution weights


@dataclass(frozen=True)
class MollifyResult:
    field: ComplexField             # h0, holomorphic on the output disk grid
    error_l1: float                 # ||h - h0||_{L^1(D(z0, rho))}
    dzbar_l1: float                 # residual ||dzbar h0||_{L^1(D(z0, rho))}
    correction_l1: float            # ||h1||_{L^1(D(z0, rho))}


def mollify_project(h: ComplexField, r: float, z0: complex, rho: float,
                    resolution: int = 512,
                    out_grid: LogPolarGrid | None = None) -> MollifyResult:
    """Holomorphic projection h0 = phi_(r) * h - h1 on D(z0, rho).

    h must be defined on D(z0, rho + 2r).  The mollification reproduces
    holomorphic functions (mean value property); the correction h1 is the
    Cauchy transform of dzbar(phi_(r) * h) restricted to the disk, so h0 is
    holomorphic there with ||h - h0|| controlled by the local holomorphic
    approximability of h.
    """
    grid = h.grid
    need = abs(z0 - grid.center) + rho + 2 * r
    if grid.r_outer < need * (1 - 1e-12):
        raise PreconditionError(
            f"mollify_project needs data on D(z0, rho + 2r): grid outer "
            f"radius {grid.r_outer:.4g} < {need:.4g}")
    cart = CartesianGrid(int(resolution), float(rho + 2 * r))
    ax = cart.axes()
    pts = (z0 + ax[None, :] + 1j * ax[:, None]).ravel()
    w = pts - grid.center
    s = np.clip(np.log(np.abs(w)), grid.s[0], grid.s[-1])
    ti = np.mod(np.angle(w), 2 * np.pi) / grid.dtheta
    si = (s - grid.s[0]) / grid.ds
    h_cart = _interp_components(h.values, si, ti).reshape(cart.n, cart.n)

    kern = _bump_kernel(cart.h, r)
    pad = kern.shape[0] // 2
    n_fft = cart.n + 2 * pad
    H = np.fft.fft2(h_cart, s=(n_fft, n_fft))
    K = np.fft.fft2(kern, s=(n_fft, n_fft))
    conv = np.fft.ifft2(H * K)
    h_r = conv[pad:pad + cart.n, pad:pad + cart.n]

    # dzbar by 4th-order differences on the Cartesian grid
    dzbar = 0.5 * (_cart_diff(h_r, cart.h, axis=1)
                   + 1j * _cart_diff(h_r, cart.h, axis=0))
    chi = np.abs(cart.nodes()) < rho
    h1 = cartesian_cauchy(np.where(chi, dzbar, 0.0), cart)
    h0_cart = h_r - h1

    if out_grid is None:
        out_grid = make_grid(np.log(rho) - 6.0, np.log(rho), 160, 64,
                             center=z0)
    z_out = out_grid.nodes
    yi = ((z_out - z0).imag + cart.half) / cart.h - 0.5
    xi = ((z_out - z0).real + cart.half) / cart.h - 0.5
    coords = np.stack([yi, xi])
    re = map_coordinates(h0_cart.real, coords, order=3, mode="nearest")
    im = map_coordinates(h0_cart.imag, coords, order=3, mode="nearest")
    h0 = ComplexField(out_grid, re + 1j * im)

    area = cart.h ** 2
    err = float(np.sum(np.abs(h_cart - h0_cart)[chi]) * area)
    corr = float(np.sum(np.abs(h1)[chi]) * area)
    dz0 = differentiate(h0)
    dzbar_l1 = integrate(out_grid, np.abs(dz0.d_zbar))
    return MollifyResult(h0, err, float(dzbar_l1), corr)


def _cart_diff(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order first derivative along axis with one-sided ends."""
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    for i in (0, 1):
        out[i] = (-25 * v[i] + 48 * v[i + 1] - 36 * v[i + 2]
                  + 16 * v[i + 3] - 3 * v[i + 4]) / (12 * h)
    for i in (-2, -1):
        out[i] = (25 * v[i] - 48 * v[i - 1] + 36 * v[i - 2]
                  - 16 * v[i - 3] + 3 * v[i - 4]) / (12 * h)
    return np.moveaxis(out, 0, axis)


# ---------------------------------------------------------------------------
# neck diagnostics: negative coefficients against their theoretical bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeckDiagnostics:
    """Negative-coefficient ledger of a Hopf-type field on D_1 \\ D_r."""

    r: float
    A0: float
    a_minus_1: float | None         # |a_{-1}| of the vector field, if given
    b_coeffs: dict                  # {n: |b_n|} for n < 0
    ratio_b_tail: dict              # |b_{-n}| / (r^{n-2} A0), n >= 3
    ratio_b1: float                 # |b_{-1}| / min(A0/r, sqrt A0 + sqrt r)
    ratio_a1: float | None          # |a_{-1}|^2 / (A0 + r)
    flagged: bool

    def summary_rows(self):
        rows = []
        for n, mag in sorted(self.b_coeffs.items()):
            k = -n
            if k >= 3:
                bound = self.r ** (k - 2) * self.A0
            elif k == 1:
                bound = min(self.A0 / self.r,
                            np.sqrt(self.A0) + np.sqrt(self.r))
            else:
                bound = self.A0 * np.log(1 / self.r)
            rows.append((n, mag, bound, mag / bound if bound > 0 else np.inf))
        return rows


def neck_diagnostics(f: ComplexField, region: Region, A0: float,
                     p: float = 1.2, ratio_ceiling: float = 1e6,
                     is_vector: bool | None = None) -> NeckDiagnostics:
    """Coefficient-bound report on an annulus D(c, r_out) \\ D(c, r_in).

    f is either the scalar Hopf-type field (b_n ledger only) or the vector
    field whose square assembles it (then a_{-1} is also reported, and
    b_n = sum_m <a_m, a_{n-m}> with the bilinear pairing).
    """
    if A0 <= 0:
        raise ConfigError("A0 must be positive")
    r = region.r_in / region.r_out
    if is_vector is None:
        is_vector = f.values.ndim == 3
    n_modes = f.grid.n_theta // 4
    series = laurent_coefficients(f, region, -n_modes, n_modes)
    a1 = None
    if is_vector:
        a1 = float(np.linalg.norm(series.coefficient(-1)))
        half = n_modes // 2
        orders = np.arange(-half, half + 1)
        b = {}
        for n in range(-half, 1):
            acc = 0.0 + 0.0j
            for m in orders:
                if n - m < orders[0] or n - m > orders[-1]:
                    continue
                am = series.coefficient(int(m))
                anm = series.coefficient(int(n - m))
                acc += np.sum(am * anm)
            b[n] = abs(acc)
        b_coeffs = {n: v for n, v in b.items() if n < 0}
    else:
        b_coeffs = {int(n): float(np.abs(series.coefficient(int(n))))
                    for n in series.orders if n < 0}

    tail = {}
    for n, mag in b_coeffs.items():
        k = -n
        if k >= 3:
            tail[n] = mag / (r ** (k - 2) * A0)
    b1 = b_coeffs.get(-1, 0.0)
    ratio_b1 = b1 / min(A0 / r, np.sqrt(A0) + np.sqrt(r))
    ratio_a1 = None if a1 is None else a1**2 / (A0 + r)
    flagged = (ratio_b1 > ratio_ceiling
               or any(v > ratio_ceiling for v in tail.values())
               or (ratio_a1 is not None and ratio_a1 > ratio_ceiling))
    if flagged:
        warnings.warn("neck diagnostics: a coefficient exceeds its bound "
                      "ceiling", stacklevel=2)
    return NeckDiagnostics(float(r), float(A0), a1, b_coeffs, tail,
                           float(ratio_b1), ratio_a1, flagged)
