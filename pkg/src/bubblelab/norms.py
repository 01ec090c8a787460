"""Region norms: L^p, Lorentz L^{2,1} / L^{2,infty}, and L ln+ L.

Lorentz norms are computed through the decreasing rearrangement of |f|
against cell areas.  A discrete field is a simple function, so the
rearrangement is exact up to quadrature: with cells sorted by descending
|f| and cumulative areas A_k,

    ||f||_{L^{2,1}}    = sum_k v_k * 2 (sqrt(A_k) - sqrt(A_{k-1}))
    ||f||_{L^{2,inf}}  = max_k sqrt(A_k) * v_k.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import LogPolarGrid, Region

__all__ = ["norm", "lp_norm", "lorentz_21", "lorentz_2inf", "l_ln_l"]


def _pointwise_abs(values: np.ndarray) -> np.ndarray:
    """|f| per node: Euclidean/Frobenius over any value axes."""
    a = np.abs(values) ** 2
    while a.ndim > 2:
        a = a.sum(axis=-1)
    return np.sqrt(a)


def _masked(grid: LogPolarGrid, values: np.ndarray, region: Region | None):
    mag = _pointwise_abs(np.asarray(values))
    w = grid.weights
    if region is not None:
        m = region.mask(grid)
        return mag[m], w[m]
    return mag.ravel(), w.ravel()


def lp_norm(grid: LogPolarGrid, values: np.ndarray, p: float,
            region: Region | None = None) -> float:
    if not (1.0 <= p < np.inf):
        raise ConfigError(f"L^p norm needs 1 <= p < inf, got p={p}")
    mag, w = _masked(grid, values, region)
    return float(np.sum(w * mag**p) ** (1.0 / p))


def _rearranged(grid, values, region):
    mag, w = _masked(grid, values, region)
    order = np.argsort(mag)[::-1]
    v = mag[order]
    areas = np.cumsum(w[order])
    return v, areas


def lorentz_21(grid: LogPolarGrid, values: np.ndarray,
               region: Region | None = None) -> float:
    v, A = _rearranged(grid, values, region)
    sqrtA = np.sqrt(A)
    prev = np.concatenate([[0.0], sqrtA[:-1]])
    return float(np.sum(v * 2.0 * (sqrtA - prev)))


def lorentz_2inf(grid: LogPolarGrid, values: np.ndarray,
                 region: Region | None = None) -> float:
    v, A = _rearranged(grid, values, region)
    if len(v) == 0:
        return 0.0
    return float(np.max(np.sqrt(A) * v))


def l_ln_l(grid: LogPolarGrid, values: np.ndarray,
           region: Region | None = None) -> float:
    """int |f| ln(2 + |f|) over the region."""
    mag, w = _masked(grid, values, region)
    return float(np.sum(w * mag * np.log(2.0 + mag)))


def norm(f, spec, region: Region | None = None) -> float:
    """Dispatch by spec: ("Lp", p) | "L21" | "L2inf" | "LlnL".

    f is a MapField/ComplexField or a (grid, values) pair.
    """
    from .fields import _grid_values
    grid, values = _grid_values(f)
    if isinstance(spec, tuple) and len(spec) == 2 and spec[0] == "Lp":
        return lp_norm(grid, values, float(spec[1]), region)
    if spec == "L21":
        return lorentz_21(grid, values, region)
    if spec == "L2inf":
        return lorentz_2inf(grid, values, region)
    if spec == "LlnL":
        return l_ln_l(grid, values, region)
    raise ConfigError(f"unknown norm spec {spec!r}")
