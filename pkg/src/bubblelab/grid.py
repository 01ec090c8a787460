"""Log-polar grids over disks and annuli, integration regions, quadrature.

The single canonical chart is s = ln r: an annulus D_rout \ D_rin becomes the
rectangle [ln rin, ln rout] x [0, 2pi), uniform in both directions.  Radial
cells are centered at s_i = s_min + (i + 1/2) ds and carry the exact integral
of the area element e^{2s} over the cell, so the total quadrature weight of
the covered annulus is pi (e^{2 s_max} - e^{2 s_min}) up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Invalid grid construction parameters."""


class RegionError(ValueError):
    """Invalid region parameters or region/grid mismatch."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class LogPolarGrid:
    """Uniform (s, theta) grid with s = ln|z - center|.

    Nodes sit at radial cell centers s_i = s_min + (i + 1/2) ds and at
    theta_j = j dtheta; theta is periodic and n_theta must be a power of two
    (>= 16) so angular derivatives can be taken spectrally.
    """

    s_min: float
    s_max: float
    n_s: int
    n_theta: int
    center: complex = 0j

    def __post_init__(self):
        if not np.isfinite(self.s_min) or not np.isfinite(self.s_max):
            raise GridError("s_min and s_max must be finite")
        if self.s_min >= self.s_max:
            raise GridError(
                f"need s_min < s_max, got [{self.s_min}, {self.s_max}]")
        if self.n_s < 4:
            raise GridError(f"n_s must be >= 4, got {self.n_s}")
        if self.n_theta < 16 or not _is_power_of_two(self.n_theta):
            raise GridError(
                f"n_theta must be a power of two >= 16, got {self.n_theta}")

    # -- geometry -----------------------------------------------------------

    @cached_property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / self.n_s

    @cached_property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @cached_property
    def s(self) -> np.ndarray:
        """Radial node coordinates s_i, shape (n_s,)."""
        i = np.arange(self.n_s)
        return self.s_min + (i + 0.5) * self.ds

    @cached_property
    def theta(self) -> np.ndarray:
        """Angular node coordinates theta_j, shape (n_theta,)."""
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def r(self) -> np.ndarray:
        return np.exp(self.s)

    @property
    def r_inner(self) -> float:
        """Inner radius of the covered annulus (cell edge, not node)."""
        return float(np.exp(self.s_min))

    @property
    def r_outer(self) -> float:
        return float(np.exp(self.s_max))

    @cached_property
    def nodes(self) -> np.ndarray:
        """Complex node positions, shape (n_s, n_theta)."""
        z = np.exp(self.s[:, None] + 1j * self.theta[None, :])
        z = self.center + z
        z.setflags(write=False)
        return z

    # -- quadrature ---------------------------------------------------------

    @cached_property
    def radial_weight(self) -> np.ndarray:
        """Exact integral of e^{2s} over each radial cell, shape (n_s,)."""
        edges = self.s_min + np.arange(self.n_s + 1) * self.ds
        e2 = np.exp(2.0 * edges)
        w = 0.5 * (e2[1:] - e2[:-1])
        w.setflags(write=False)
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Cell area weights, shape (n_s, n_theta); sums to the annulus area."""
        w = np.broadcast_to(
            (self.radial_weight * self.dtheta)[:, None],
            (self.n_s, self.n_theta)).copy()
        w.setflags(write=False)
        return w

    @property
    def total_weight(self) -> float:
        return float(np.pi * (np.exp(2 * self.s_max) - np.exp(2 * self.s_min)))

    # -- derived grids ------------------------------------------------------

    def refined(self, factor: int = 2) -> "LogPolarGrid":
        """Same domain with factor-times more cells in both directions."""
        return LogPolarGrid(self.s_min, self.s_max, self.n_s * factor,
                            self.n_theta * factor, self.center)

    def padded(self, pad_s: float) -> "LogPolarGrid":
        """Extend the s-range by pad_s on both ends, keeping ds."""
        n_pad = int(np.ceil(pad_s / self.ds))
        return LogPolarGrid(self.s_min - n_pad * self.ds,
                            self.s_max + n_pad * self.ds,
                            self.n_s + 2 * n_pad, self.n_theta, self.center)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_s, self.n_theta)


def make_grid(s_min: float, s_max: float, n_s: int, n_theta: int,
              center: complex = 0j) -> LogPolarGrid:
    """Construct a LogPolarGrid, validating the type invariants."""
    return LogPolarGrid(float(s_min), float(s_max), int(n_s), int(n_theta),
                        complex(center))


def disk_grid(r_out: float, n_s: int, n_theta: int, center: complex = 0j,
              r_core: float = 1e-4) -> LogPolarGrid:
    """Grid approximating the disk D(center, r_out), truncated at r_core*r_out."""
    return make_grid(np.log(r_core * r_out), np.log(r_out), n_s, n_theta,
                     center)


@dataclass(frozen=True)
class Region:
    """Disk, annulus, or difference of (possibly non-concentric) disks.

    Membership is half-open: r_in <= |z - center| < r_out, so regions built
    with matching radii partition the plane exactly.
    """

    kind: str
    center: complex
    r_in: float
    r_out: float
    hole_center: complex | None = None

    def __post_init__(self):
        if self.kind not in ("disk", "annulus", "difference"):
            raise RegionError(f"unknown region kind {self.kind!r}")
        if not (0.0 <= self.r_in < self.r_out):
            raise RegionError(
                f"need 0 <= r_in < r_out, got ({self.r_in}, {self.r_out})")
        if self.kind == "disk" and self.r_in != 0.0:
            raise RegionError("disk regions must have r_in = 0")

    def mask(self, grid: LogPolarGrid) -> np.ndarray:
        """Boolean node membership on the grid, shape grid.shape."""
        z = grid.nodes
        outer = np.abs(z - self.center) < self.r_out
        if self.r_in == 0.0:
            return outer
        hc = self.center if self.hole_center is None else self.hole_center
        return outer & (np.abs(z - hc) >= self.r_in)

    def is_empty_on(self, grid: LogPolarGrid) -> bool:
        return not bool(self.mask(grid).any())


def disk(center: complex, radius: float) -> Region:
    return Region("disk", complex(center), 0.0, float(radius))


def annulus(center: complex, r_in: float, r_out: float) -> Region:
    return Region("annulus", complex(center), float(r_in), float(r_out))


def disk_difference(center: complex, r_out: float, hole_center: complex,
                    r_in: float) -> Region:
    return Region("difference", complex(center), float(r_in), float(r_out),
                  hole_center=complex(hole_center))


def whole_grid(grid: LogPolarGrid) -> Region:
    """Region covering every node of the grid."""
    return annulus(grid.center, 0.5 * grid.r_inner, 2.0 * grid.r_outer)


def integrate(grid: LogPolarGrid, values: np.ndarray,
              region: Region | None = None) -> float:
    """Quadrature of a scalar node field over region (whole grid if None)."""
    v = np.asarray(values)
    if v.shape != grid.shape:
        raise RegionError(f"field shape {v.shape} != grid shape {grid.shape}")
    if region is None:
        return float(np.sum(grid.weights * v))
    m = region.mask(grid)
    return float(np.sum(grid.weights[m] * v[m]))
