"""Embedded target manifolds N in R^k.

Provides the tangent projector field P(y), the second fundamental form
A(y)(v, w) (normal valued), and the nearest-point retraction.  The round
sphere has closed forms; generic targets are described by an implicit
function F: R^k -> R^m with first and second derivative callables.

All point operations accept arrays whose last axis is the ambient dimension
and broadcast over leading axes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np


class TargetDomainError(ValueError):
    """Point too far from the target manifold."""


class Target:
    """Interface for an embedded closed manifold N in R^k."""

    ambient_dim: int
    dim: int

    #: multiple of the local feature size within which retraction is trusted
    RETRACT_FRACTION = 0.1

    def feature_size(self) -> float:
        raise NotImplementedError

    def distance(self, p: np.ndarray) -> np.ndarray:
        """Unsigned distance from p to N."""
        return np.linalg.norm(np.asarray(p) - self.retract_unchecked(p),
                              axis=-1)

    def retract_unchecked(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def retract(self, p: np.ndarray) -> np.ndarray:
        """Nearest point on N; raises TargetDomainError if p is too far."""
        p = np.asarray(p, dtype=float)
        q = self.retract_unchecked(p)
        dist = np.linalg.norm(p - q, axis=-1)
        tol = self.RETRACT_FRACTION * self.feature_size()
        if np.any(dist > tol):
            worst = float(np.max(dist))
            raise TargetDomainError(
                f"point at distance {worst:.3e} from target exceeds "
                f"retraction tolerance {tol:.3e}")
        return q

    def projector_at(self, q: np.ndarray) -> np.ndarray:
        """Tangent projector P(q) for q already on N, shape (..., k, k)."""
        raise NotImplementedError

    def project(self, p: np.ndarray) -> np.ndarray:
        """Tangent projector at the nearest point of N to p."""
        return self.projector_at(self.retract(p))

    def second_fundamental_form(self, p: np.ndarray, v: np.ndarray,
                                w: np.ndarray) -> np.ndarray:
        """A(p)(v, w): bilinear, symmetric, normal to N at p.

        v and w are auto-projected to the tangent space (with a warning when
        the correction is non-negligible).
        """
        q = self.retract(p)
        P = self.projector_at(q)
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        vt = np.einsum("...ij,...j->...i", P, v)
        wt = np.einsum("...ij,...j->...i", P, w)
        vn = np.linalg.norm(v - vt, axis=-1)
        scale = np.linalg.norm(v, axis=-1) + np.linalg.norm(w, axis=-1)
        if np.any(vn + np.linalg.norm(w - wt, axis=-1) > 1e-6 * (scale + 1e-30)):
            warnings.warn("second_fundamental_form: inputs were not tangent; "
                          "projected", stacklevel=2)
        return self._sff_tangent(q, vt, wt)

    def _sff_tangent(self, q, vt, wt):
        raise NotImplementedError

    # -- description --------------------------------------------------------

    def descriptor(self) -> dict:
        raise NotImplementedError

    #: default tolerance for "value lies on N" assertions, times ambient scale
    ON_MANIFOLD_TOL = 1e-6

    def check_on_manifold(self, p: np.ndarray, what: str = "map values"):
        d = self.distance(p)
        tol = self.ON_MANIFOLD_TOL * self.feature_size()
        if np.any(d > tol):
            raise TargetDomainError(
                f"{what} off the target manifold: max distance "
                f"{float(np.max(d)):.3e} > {tol:.3e}")


@dataclass(frozen=True)
class Sphere(Target):
    """Round sphere of given radius about the origin in R^k."""

    ambient_dim: int = 3
    radius: float = 1.0

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("sphere needs ambient dimension >= 2")
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def feature_size(self) -> float:
        # distance to the medial axis (the center)
        return self.radius

    def retract_unchecked(self, p):
        p = np.asarray(p, dtype=float)
        n = np.linalg.norm(p, axis=-1, keepdims=True)
        if np.any(n == 0.0):
            raise TargetDomainError("cannot retract the origin to a sphere")
        return self.radius * p / n

    def projector_at(self, q):
        q = np.asarray(q, dtype=float)
        n = q / self.radius
        eye = np.eye(self.ambient_dim)
        return eye - n[..., :, None] * n[..., None, :]

    def _sff_tangent(self, q, vt, wt):
        # A(q)(v, w) = -<v, w> q / radius^2
        inner = np.sum(vt * wt, axis=-1)
        return -inner[..., None] * q / self.radius**2

    def descriptor(self):
        return {"kind": "sphere", "ambient_dim": self.ambient_dim,
                "radius": self.radius}


@dataclass(frozen=True)
class ImplicitTarget(Target):
    """Level set N = {F = 0} of a submersion F: R^k -> R^m.

    jacobian(p) must return DF with shape (..., m, k); hessian(p) the
    second derivative with shape (..., m, k, k).  feature is a lower bound
    on the local feature size (reach) used for retraction tolerances.
    """

    ambient_dim: int
    codim: int
    func: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    feature: float = 1.0
    name: str = "implicit"

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.codim

    def feature_size(self) -> float:
        return self.feature

    def retract_unchecked(self, p):
        # Gauss-Newton on F(x) = 0 along normal directions; for points within
        # the reach this converges to the nearest point quadratically.
        x = np.asarray(p, dtype=float).copy()
        for _ in range(40):
            f = np.atleast_1d(self.func(x))
            if np.max(np.abs(f)) < 1e-14 * self.feature:
                break
            J = self.jacobian(x)
            JJt = np.einsum("...ik,...jk->...ij", J, J)
            lam = np.linalg.solve(JJt, f[..., :, None])[..., 0]
            x = x - np.einsum("...ik,...i->...k", J, lam)
        return x

    def projector_at(self, q):
        # P = I - J^T (J J^T)^{-1} J
        J = self.jacobian(q)
        JJt = np.einsum("...ik,...jk->...ij", J, J)
        JJt_inv = np.linalg.inv(JJt)
        normal_proj = np.einsum("...mi,...mn,...nj->...ij", J, JJt_inv, J)
        return np.eye(self.ambient_dim) - normal_proj

    def _sff_tangent(self, q, vt, wt):
        # A(v, w) = -J^+ (v^T Hess F w), the classical implicit-surface form
        J = self.jacobian(q)
        H = self.hessian(q)
        JJt = np.einsum("...ik,...jk->...ij", J, J)
        hvw = np.einsum("...mij,...i,...j->...m", H, vt, wt)
        lam = np.linalg.solve(JJt, hvw[..., :, None])[..., 0]
        return -np.einsum("...mk,...m->...k", J, lam)

    def descriptor(self):
        return {"kind": "implicit", "name": self.name,
                "ambient_dim": self.ambient_dim, "codim": self.codim}


def make_target(desc: dict) -> Target:
    """Build a target from a descriptor dict (see Target.descriptor)."""
    kind = desc.get("kind", "sphere")
    if kind == "sphere":
        return Sphere(ambient_dim=int(desc.get("ambient_dim", 3)),
                      radius=float(desc.get("radius", 1.0)))
    raise ValueError(f"unknown target kind {kind!r}")
