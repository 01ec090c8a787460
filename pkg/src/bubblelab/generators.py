"""Synthetic map families with known energies, Hopf fields and tension budgets.

Closed-form specimens:

  * harmonic spheres u = Pi^{-1}(R(z)) for rational R, written homogeneously
    as (2 Re(a conj b), 2 Im(a conj b), |a|^2 - |b|^2) / (|a|^2 + |b|^2) with
    a = P(z), b = Q(z); exactly harmonic, energy 4 pi deg, Hopf field 0.
  * geodesic necks u = gamma(psi(ln|z|)) along a unit-speed great circle;
    exactly harmonic for affine psi, with h = psi'^2 / (4 z^2) and
    E(D_b \\ D_a) = pi int psi'^2 ds.
  * glued sequences: bubble(s), an optional neck, and a body joined by
    smoothstep partitions of unity in s at fixed log-radial width, then
    retracted to the target.  Transitions at fixed s-width make tension
    budgets scale-exact: a junction shrunk by r keeps its L^1 tension and
    scales its L^p tension by r^{(2-2p)/p}.

Power-profile necks psi'(s) = c e^{lambda (s - s_out)} with
lambda = (2p-2)/p saturate the L^p tension budget uniformly across scales
and produce the neck energy decay rho^{(4p-4)/p}; geodesic necks with
a_n = (ln 1/r_n)^{-1/2} keep L^1 tension bounded while retaining neck
energy pi (the sharpness regime); a_n = L / ln(1/r_n) keeps the neck image
an arc of length L while its energy vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, PreconditionError
from .fields import MapField
from .grid import LogPolarGrid, make_grid
from .targets import Sphere, Target

__all__ = [
    "SequenceSpec", "BubbleInfo", "GluedMap", "harmonic_sphere",
    "geodesic_neck", "glue_sequence", "perturb", "BumpSpec", "family_grid",
    "single_bubble_family", "bubble_on_bubble_family", "sharpness_family",
    "fixed_length_family",
]


def _smoothstep01(x: np.ndarray) -> np.ndarray:
    """Quintic 0 -> 1 ramp on [0, 1] with flat ends."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


# ---------------------------------------------------------------------------
# closed-form specimens
# ---------------------------------------------------------------------------

def _rational_sphere_values(numer, denom, z: np.ndarray) -> np.ndarray:
    """Inverse stereographic image of P(z)/Q(z), homogeneous and pole-safe."""
    a = npoly.polyval(z, np.asarray(numer, dtype=complex))
    b = npoly.polyval(z, np.asarray(denom, dtype=complex))
    n2 = np.abs(a) ** 2 + np.abs(b) ** 2
    if np.any(n2 == 0.0):
        raise ConfigError("rational map has a common zero of P and Q")
    ab = a * np.conj(b)
    return np.stack([2.0 * ab.real / n2, 2.0 * ab.imag / n2,
                     (np.abs(a) ** 2 - np.abs(b) ** 2) / n2], axis=-1)


def rational_degree(numer, denom) -> int:
    numer = np.trim_zeros(np.asarray(numer, dtype=complex), "b")
    denom = np.trim_zeros(np.asarray(denom, dtype=complex), "b")
    return max(len(numer), len(denom)) - 1


def _check_nonconstant(numer, denom):
    # R = P/Q is constant iff the Wronskian P Q' - P' Q vanishes identically
    P = np.asarray(numer, dtype=complex)
    Q = np.asarray(denom, dtype=complex)
    w = npoly.polysub(npoly.polymul(P, npoly.polyder(Q)),
                      npoly.polymul(npoly.polyder(P), Q))
    scale = max(np.abs(P).max(), np.abs(Q).max())
    if np.all(np.abs(w) <= 1e-14 * scale**2):
        raise ConfigError("rational map is constant")


def harmonic_sphere(numer, denom, grid: LogPolarGrid,
                    target: Sphere | None = None) -> MapField:
    """Harmonic sphere (bubble) u = Pi^{-1}(P(z)/Q(z)) sampled on grid.

    The rational map must be nonconstant and in lowest terms; the plane map
    has energy 4 pi max(deg P, deg Q) and vanishing Hopf differential.
    """
    target = target if target is not None else Sphere(3)
    if not isinstance(target, Sphere) or target.ambient_dim != 3:
        raise ConfigError("harmonic spheres require the unit S^2 target")
    _check_nonconstant(numer, denom)
    vals = _rational_sphere_values(numer, denom, grid.nodes) * target.radius
    return MapField(grid, vals, target)


def great_circle_frame(target: Sphere, through: np.ndarray | None = None,
                       toward: np.ndarray | None = None):
    """Orthonormal (e1, e2) spanning a great circle, e1 = through."""
    k = target.ambient_dim
    e1 = np.zeros(k)
    e1[0] = 1.0
    if through is not None:
        e1 = np.asarray(through, dtype=float)
        e1 = e1 / np.linalg.norm(e1)
    e2 = np.zeros(k)
    e2[1] = 1.0
    if toward is not None:
        e2 = np.asarray(toward, dtype=float)
    e2 = e2 - e1 * np.dot(e1, e2)
    nrm = np.linalg.norm(e2)
    if nrm < 1e-12:
        raise ConfigError("great circle directions are parallel")
    return e1, e2 / nrm


def geodesic_neck(a: float, grid: LogPolarGrid, target: Sphere | None = None,
                  through: np.ndarray | None = None,
                  toward: np.ndarray | None = None,
                  phase: float = 0.0) -> MapField:
    """u(z) = gamma(a ln|z| + phase) along a unit-speed great circle.

    Exactly harmonic; h = a^2/(4 z^2); E(D_rout \\ D_rin) =
    pi a^2 ln(rout/rin).
    """
    target = target if target is not None else Sphere(3)
    e1, e2 = great_circle_frame(target, through, toward)
    t = a * grid.s[:, None] + phase + 0.0 * grid.theta[None, :]
    vals = (np.cos(t)[..., None] * e1 + np.sin(t)[..., None] * e2)
    return MapField(grid, vals * target.radius, target)


# ---------------------------------------------------------------------------
# glued families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BubbleInfo:
    """Ground-truth record of one glued bubble."""

    center: complex
    scale: float
    degree: int
    energy: float            # full-plane energy 4 pi degree
    parent: int              # index of the parent node (0 = body)
    numer: tuple = (0.0, 1.0)
    denom: tuple = (1.0,)


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of a glued map family.

    kind: single_bubble | bubble_on_bubble | sharpness | fixed_length
    neck: none | geodesic | power (power uses exponent lam = (2p-2)/p)
    """

    kind: str
    q: float = 0.25
    r0: float = 0.05
    delta0: float = 0.25
    R0: float = 4.0
    transition_width: float = 0.7
    neck: str = "none"
    neck_p: float | None = None       # L^p budget the power neck saturates
    neck_length: float | None = None  # arc length for fixed_length necks
    body: str = "constant"            # constant | cap
    body_scale: float = 0.2
    target: Sphere = field(default_factory=Sphere)

    def __post_init__(self):
        if self.kind not in ("single_bubble", "bubble_on_bubble",
                             "sharpness", "fixed_length"):
            raise ConfigError(f"unknown family kind {self.kind!r}")
        if not (0.1 <= self.q <= 0.9):
            raise ConfigError(f"scale ratio q={self.q} outside [0.1, 0.9]")
        if not (0.0 < self.r0 < self.delta0 < 1.0):
            raise ConfigError("need 0 < r0 < delta0 < 1")
        if self.neck not in ("none", "geodesic", "power"):
            raise ConfigError(f"unknown neck kind {self.neck!r}")
        if self.neck == "power" and not (self.neck_p and 1 < self.neck_p <= 2):
            raise ConfigError("power necks need neck_p in (1, 2]")
        if self.kind == "fixed_length" and not self.neck_length:
            raise ConfigError("fixed_length families need neck_length")

    def scale(self, n: int) -> float:
        """Bubble scale r_n = r0 q^n (strictly decreasing to 0)."""
        if n < 0:
            raise ConfigError("family index n must be >= 0")
        return self.r0 * self.q**n

    def neck_span(self, n: int) -> float:
        """Realized neck width in s: ln(delta0 / (R0 r_n))."""
        return float(np.log(self.delta0 / (self.R0 * self.scale(n))))

    def neck_amplitude(self, n: int) -> float:
        """a_n (geodesic necks) or c_n (power necks) at family index n.

        Normalized over the realized neck span, so the sharpness family
        carries neck energy exactly pi at every n (the 1/ln(1/r_n) schedule
        is the n -> infinity limit of this).
        """
        L = self.neck_span(n)
        if self.kind == "sharpness":
            return L ** -0.5
        if self.kind == "fixed_length":
            return self.neck_length / L
        if self.neck == "power":
            return L ** (-1.0 / self.neck_p)
        return 0.0


@dataclass(frozen=True)
class GluedMap:
    """A generated u_n with its ground-truth ledger."""

    spec: SequenceSpec
    n: int
    field: MapField
    bubbles: tuple[BubbleInfo, ...]
    body_energy: float
    expected_neck_energy: float
    expected_neck_oscillation: float
    neck_annulus: tuple[float, float]   # (r_in, r_out) of the neck region


_NORTH = np.array([0.0, 0.0, 1.0])
_SOUTH = np.array([0.0, 0.0, -1.0])
_E2 = np.array([1.0, 0.0, 0.0])


def _neck_psi(spec: SequenceSpec, n: int, s: np.ndarray,
              s_in: float, s_out: float):
    """Neck angle psi(s) with psi(s_in) = 0, plus psi'(s)."""
    amp = spec.neck_amplitude(n)
    if spec.neck == "geodesic" or spec.kind in ("sharpness", "fixed_length"):
        return amp * (s - s_in), amp * np.ones_like(s)
    if spec.neck == "power":
        lam = (2.0 * spec.neck_p - 2.0) / spec.neck_p
        psi = (amp / lam) * (np.exp(lam * (s - s_out))
                             - np.exp(lam * (s_in - s_out)))
        dpsi = amp * np.exp(lam * (s - s_out))
        return psi, dpsi
    return np.zeros_like(s), np.zeros_like(s)


def _neck_energy_closed_form(spec: SequenceSpec, n: int,
                             s_in: float, s_out: float) -> float:
    """pi int_{s_in}^{s_out} psi'(s)^2 ds."""
    amp = spec.neck_amplitude(n)
    if spec.neck == "geodesic" or spec.kind in ("sharpness", "fixed_length"):
        return float(np.pi * amp**2 * (s_out - s_in))
    if spec.neck == "power":
        lam = (2.0 * spec.neck_p - 2.0) / spec.neck_p
        return float(np.pi * amp**2
                     * (1.0 - np.exp(2 * lam * (s_in - s_out))) / (2 * lam))
    return 0.0


def glue_sequence(spec: SequenceSpec, n: int,
                  grid: LogPolarGrid | None = None) -> GluedMap:
    """Build u_n on grid (a family_grid by default) with ground-truth data."""
    if grid is None:
        grid = family_grid(spec, n)
    if spec.transition_width < 4.0 * grid.ds:
        raise PreconditionError(
            f"transition width {spec.transition_width:.3f} spans fewer than "
            f"4 radial cells (ds = {grid.ds:.4f}); use a finer grid")
    W = spec.transition_width
    r_n = spec.scale(n)
    s = grid.s[:, None] + 0.0 * grid.theta[None, :]
    z = grid.nodes
    s_out = np.log(spec.delta0)

    # body
    if spec.body == "cap":
        c = spec.body_scale
        body_vals = _rational_sphere_values([0.0, c], [1.0], z)
        body_energy = float(4.0 * np.pi * c**2 / (1.0 + c**2))
    else:
        body_vals = np.broadcast_to(_SOUTH, z.shape + (3,)).copy()
        body_energy = 0.0

    has_neck = spec.kind in ("sharpness", "fixed_length") or \
        spec.neck != "none"
    bubbles: list[BubbleInfo] = []

    if spec.kind == "bubble_on_bubble":
        # outer bubble 1/z (0 -> north, inf -> south = body constant),
        # inner bubble z (inf -> north) riding at the deeper scale, with
        # the scale ratio sqrt(q)^(n+2) -> 0 across the family
        r2 = r_n * spec.q ** ((n + 2) / 2.0)
        b1 = _rational_sphere_values([1.0], [0.0, 1.0], z / r_n)
        b2 = _rational_sphere_values([0.0, 1.0], [1.0], z / r2)
        core = b1 + (b2 - _NORTH)
        bubbles.append(BubbleInfo(0j, r_n, 1, 4.0 * np.pi, 0,
                                  (1.0,), (0.0, 1.0)))
        bubbles.append(BubbleInfo(0j, r2, 1, 4.0 * np.pi, 1))
        inner_value = core
        s_attach = s_out  # blend core -> body across [s_out, s_out + W]
        neck_in = r_n * spec.R0
    elif has_neck:
        # bubble (inf -> north) + theta-independent neck along a great
        # circle through north + constant body at the neck's outer value
        s_in = np.log(spec.R0 * r_n)
        if spec.neck == "power":
            # power necks ride over a small constant core: the profile decay
            # keeps the junction L^p tension bounded without a bubble
            core = np.broadcast_to(_NORTH, z.shape + (3,)).copy()
        else:
            core = _rational_sphere_values([0.0, 1.0], [1.0], z / r_n)
            bubbles.append(BubbleInfo(0j, r_n, 1, 4.0 * np.pi, 0))
        psi, _ = _neck_psi(spec, n, s, s_in, s_out)
        e1, e2 = _NORTH, _E2
        neck_vals = np.cos(psi)[..., None] * e1 + np.sin(psi)[..., None] * e2
        chi_in = _smoothstep01((s - s_in) / W)[..., None]
        core = core + chi_in * (neck_vals - _NORTH)
        psi_end, _ = _neck_psi(spec, n, np.array([[s_out]]), s_in, s_out)
        end = float(psi_end[0, 0])
        body_vals = (np.cos(end) * e1 + np.sin(end) * e2
                     )[None, None, :] + 0.0 * core
        body_energy = 0.0
        inner_value = core
        s_attach = s_out
        neck_in = spec.R0 * r_n
    else:
        # plain single bubble (inf -> south = body constant)
        core = _rational_sphere_values([1.0], [0.0, 1.0], z / r_n)
        bubbles.append(BubbleInfo(0j, r_n, 1, 4.0 * np.pi, 0,
                                  (1.0,), (0.0, 1.0)))
        inner_value = core
        s_attach = s_out
        neck_in = spec.R0 * r_n

    chi_out = _smoothstep01((s - s_attach) / W)[..., None]
    raw = inner_value + chi_out * (body_vals - inner_value)
    vals = spec.target.retract_unchecked(raw * spec.target.radius)
    fld = MapField(grid, vals, spec.target)

    if has_neck and spec.kind != "bubble_on_bubble":
        s_in = np.log(spec.R0 * r_n)
        e_neck = _neck_energy_closed_form(spec, n, s_in, s_out)
        arc = abs(_neck_psi(spec, n, np.array([[s_out]]), s_in, s_out)[0][0, 0])
        osc = 2.0 * np.sin(min(arc, np.pi) / 2.0)
    else:
        e_neck, osc = 0.0, 0.0
    return GluedMap(spec, n, fld, tuple(bubbles), body_energy,
                    e_neck, osc, (neck_in, spec.delta0))


def family_grid(spec: SequenceSpec, n: int, n_theta: int = 64,
                ds: float = 0.02, s_margin: float = 5.0,
                outer: float = 1.4) -> LogPolarGrid:
    """Grid resolving the deepest feature of u_n with fixed cell size."""
    deepest = spec.scale(n)
    if spec.kind == "bubble_on_bubble":
        deepest *= spec.q ** ((n + 2) / 2.0)
    s_min = np.log(deepest) - s_margin
    s_max = np.log(outer)
    n_s = int(np.ceil((s_max - s_min) / ds))
    return make_grid(s_max - n_s * ds, s_max, n_s, n_theta)


def single_bubble_family(neck_p: float | None = None, **kw) -> SequenceSpec:
    neck = "power" if neck_p else "none"
    return SequenceSpec(kind="single_bubble", neck=neck, neck_p=neck_p, **kw)


def bubble_on_bubble_family(**kw) -> SequenceSpec:
    return SequenceSpec(kind="bubble_on_bubble", **kw)


def sharpness_family(**kw) -> SequenceSpec:
    kw.setdefault("q", 0.2)
    kw.setdefault("r0", 1e-3)
    kw.setdefault("R0", 2.0)
    return SequenceSpec(kind="sharpness", neck="geodesic", **kw)


def fixed_length_family(length: float, **kw) -> SequenceSpec:
    return SequenceSpec(kind="fixed_length", neck="geodesic",
                        neck_length=length, **kw)


# ---------------------------------------------------------------------------
# perturbation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpSpec:
    """Smooth compactly supported vector bump V(z) = d (1 - |z-z0|^2/rho^2)^3."""

    center: complex
    radius: float
    direction: tuple[float, ...]

    def values(self, z: np.ndarray) -> np.ndarray:
        t2 = np.abs(z - self.center) ** 2 / self.radius**2
        prof = np.where(t2 < 1.0, (1.0 - np.clip(t2, 0, 1)) ** 3, 0.0)
        d = np.asarray(self.direction, dtype=float)
        return prof[..., None] * d


def perturb(u: MapField, eps: float, profile: BumpSpec) -> MapField:
    """u' = retract(u + eps V); tension scales as Theta(eps) for small eps."""
    if eps == 0.0:
        return u
    vals = u.values + eps * profile.values(u.grid.nodes)
    try:
        vals = u.target.retract(vals)
    except Exception as exc:
        raise PreconditionError(
            f"perturbation amplitude {eps} defeats retraction: {exc}"
        ) from exc
    return MapField(u.grid, vals, u.target)
