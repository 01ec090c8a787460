"""Coulomb gauge pipeline: adapted frames, gauge potential, fixed point B,
and the decomposition A = B (G1 + G2) with G1 anti-holomorphically free.

The frame R stacks the tangent and normal projectors of the map,
R0 = (P(u); I - P(u)), a 2k x k orthonormal-column field.  Frame energy
is minimized over the gauge orbit R exp(psi), psi an so(k)-valued field on
a padded domain, by Poisson-preconditioned gradient descent; the
first-order condition div((dR^T) R) = 0 is the Coulomb gauge.  In log-polar
coordinates the Dirichlet energy is the flat cylinder integral, so the
preconditioner is the flat (s, theta) Laplacian.

After gauge fixing:

    w    = (dR^T/dzbar) R            (so(k) tensor C)
    A    = R^T (du/dz; 0),  tau1 = R^T (tau; 0) / 4
    dA/dzbar = w A + tau1            (gauge equation, residual reported)
    B - T(B) = I,  T(B) = (1/(pi z)) * (w B)   (contraction when ||T||<1/3)
    G = B^{-1} A,  G2 = (1/(pi z)) * (B^{-1} tau1 chi_Omega),  G1 = G - G2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .cauchy import (CartesianGrid, cartesian_cauchy, sample_from_cartesian,
                     sample_to_cartesian)
from .errors import NumericsError, PreconditionError
from .fields import (ComplexField, MapField, _d_s, _d_s_transpose, _d_theta,
                     _smoothstep, differentiate, dirichlet_energy, tension)
from .grid import LogPolarGrid, Region, integrate, whole_grid
from .norms import lorentz_21, lp_norm

__all__ = ["FrameField", "GaugeData", "initial_frame", "coulomb_gauge",
           "solve_B", "decompose", "BResult"]


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameField:
    """Orthonormal 2k x k frame of the pulled-back bundle; real values."""

    grid: LogPolarGrid
    values: np.ndarray   # (n_s, n_theta, 2k, k)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.shape[-1]

    def orthonormality_defect(self) -> float:
        v = self.values
        g = np.einsum("...ai,...aj->...ij", v, v)
        return float(np.max(np.abs(g - np.eye(self.k))))

    def block_projector_defect(self, u: MapField) -> float:
        """max | R R^T - diag(P(u), I - P(u)) | over u's grid rows."""
        P = u.target.projector_at(u.values)
        k = self.k
        rr = np.einsum("...ai,...bi->...ab", self.values, self.values)
        want = np.zeros(rr.shape)
        want[..., :k, :k] = P
        want[..., k:, k:] = np.eye(k) - P
        return float(np.max(np.abs(rr - want)))


def initial_frame(u: MapField) -> FrameField:
    """Stacked-projector frame R0 = (P(u); I - P(u))."""
    u.target.check_on_manifold(u.values)
    P = u.target.projector_at(u.values)
    k = u.ambient_dim
    vals = np.concatenate([P, np.eye(k) - P], axis=-2)
    return FrameField(u.grid, vals)


def _extend_frame_c1(grid, values, pad_s: float):
    """C^1 taper of frame data to theta-mean constants past both ends.

    Even reflection (extend_field) is energy-correct but kinks the radial
    derivative, which stalls Newton steps; the gauge solver wants smooth
    initial data, so each pad row is value-and-slope matched and damped to
    the boundary-circle mean over the pad width.
    """
    pgrid = grid.padded(pad_s)
    n_pad = (pgrid.n_s - grid.n_s) // 2
    W = n_pad * grid.ds

    def _band(f_b, f_prev):
        # f(boundary +/- tau) ~ f_b + tau (f_b - f_prev)/ds, damped to c
        slope = (f_b - f_prev) / grid.ds
        c = f_b.mean(axis=0, keepdims=True)
        tau = (np.arange(n_pad) + 1.0) * grid.ds
        chi = _smoothstep(tau / W)
        sh = (n_pad,) + (1,) * f_b.ndim
        tau = tau.reshape(sh)
        chi = chi.reshape(sh)
        return c[None] + chi * (f_b[None] - c[None]) + tau * chi * slope[None]

    outer = _band(values[-1], values[-2])
    inner = _band(values[0], values[1])[::-1]
    ext = np.concatenate([inner, values, outer], axis=0)
    return pgrid, ext


def _skew(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - np.swapaxes(M, -1, -2))


def _expm_so3(W: np.ndarray) -> np.ndarray:
    """Rodrigues formula, batched over leading axes of (..., 3, 3) skews."""
    wx = W[..., 2, 1]
    wy = W[..., 0, 2]
    wz = W[..., 1, 0]
    th = np.sqrt(wx**2 + wy**2 + wz**2)
    th_safe = np.where(th > 1e-30, th, 1.0)
    a = np.where(th > 1e-6, np.sin(th_safe) / th_safe,
                 1.0 - th**2 / 6.0)
    b = np.where(th > 1e-6, (1.0 - np.cos(th_safe)) / th_safe**2,
                 0.5 - th**2 / 24.0)
    W2 = W @ W
    eye = np.eye(3)
    return eye + a[..., None, None] * W + b[..., None, None] * W2


def _expm_skew(W: np.ndarray) -> np.ndarray:
    if W.shape[-1] == 3:
        return _expm_so3(W)
    # iW is Hermitian: diagonalize batched
    lam, V = np.linalg.eigh(1j * W)
    phase = np.exp(-1j * lam)
    out = np.einsum("...ij,...j,...kj->...ik", V, phase, np.conj(V))
    return out.real


def _orthonormalize_columns(v: np.ndarray) -> np.ndarray:
    """Closest orthonormal-column matrix (polar factor), batched."""
    U, _, Vh = np.linalg.svd(v, full_matrices=False)
    return U @ Vh


# ---------------------------------------------------------------------------
# Coulomb gauge minimization
# ---------------------------------------------------------------------------

def _flat_energy(grid: LogPolarGrid, v: np.ndarray) -> float:
    """(1/2) int (|d_s v|^2 + |d_theta v|^2) ds dtheta."""
    vs = _d_s(v, grid.ds, 1)
    vt = _d_theta(v, 1)
    dens = np.abs(vs) ** 2 + np.abs(vt) ** 2
    while dens.ndim > 2:
        dens = dens.sum(axis=-1)
    return float(0.5 * dens.sum() * grid.ds * grid.dtheta)


def _dtheta_gram(values: np.ndarray) -> np.ndarray:
    """D_theta^T D_theta applied spectrally (k^2 multiplier incl. Nyquist).

    Matches the per-mode m^2 shift of the Poisson preconditioner exactly.
    """
    n = values.shape[1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = k**2
    shape = (1, n) + (1,) * (values.ndim - 2)
    out = np.fft.ifft(np.fft.fft(values, axis=1) * mult.reshape(shape),
                      axis=1)
    return out.real if np.isrealobj(values) else out


def _frame_gradient(grid: LogPolarGrid, R: np.ndarray):
    """Exact gradient of the discrete frame energy along the gauge orbit.

    The minimization energy uses staggered forward differences in s and
    spectral differences in theta: E = (1/2) ds dtheta (sum |D_f R|^2 +
    sum |D_theta R|^2).  Along the orbit move R -> R exp(t psi),
    dE/dt|0 = ds dtheta <Skew(R^T L R), psi> with L = D_f^T D_f + D_th^T
    D_th; no discrete product rule enters, so the gradient vanishes exactly
    at the discrete minimum, and L is exactly the operator inverted by the
    Poisson preconditioner (Newton steps of size about one).
    """
    t = np.diff(R, axis=0) / grid.ds
    gram = _dtheta_gram(R)
    LR = gram.copy()
    LR[:-1] -= t / grid.ds
    LR[1:] += t / grid.ds
    grad = _skew(np.einsum("...ai,...aj->...ij", R, LR))
    e_flat = float(0.5 * ((t**2).sum() + (R * gram).sum())
                   * grid.ds * grid.dtheta)
    return grad, LR, e_flat


def _poisson_precondition(grid: LogPolarGrid, rhs: np.ndarray) -> np.ndarray:
    """Solve (d_ss + d_tt) eta = rhs on the cylinder, Neumann in s.

    The constant mode (a global gauge rotation, which leaves the energy
    unchanged) is projected out of the right-hand side and the solution.
    """
    n_s, n_t = grid.shape
    flat = rhs.reshape(n_s, n_t, -1)
    rhs_hat = np.fft.fft(flat, axis=1)
    modes = np.fft.fftfreq(n_t, d=1.0 / n_t)
    out = np.empty_like(rhs_hat)
    inv_ds2 = 1.0 / grid.ds**2
    for m_idx, m in enumerate(modes):
        band = np.zeros((3, n_s))
        band[0, 1:] = inv_ds2
        band[1, :] = -2.0 * inv_ds2 - m * m
        band[1, 0] = -inv_ds2 - m * m
        band[1, -1] = -inv_ds2 - m * m
        band[2, :-1] = inv_ds2
        b = rhs_hat[:, m_idx, :]
        if m == 0:
            b = b - b.mean(axis=0, keepdims=True)
            band[1, :] -= 1e-9 * inv_ds2
        out[:, m_idx, :] = solve_banded((1, 1), band, b)
    eta = np.fft.ifft(out, axis=1).real.reshape(rhs.shape)
    return eta


@dataclass
class CoulombReport:
    iterations: int
    residual_rel: float
    energy: float
    energy_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    truncation_tail: float = 0.0


@dataclass
class GaugeData:
    """Gauge pipeline state; completed stage by stage."""

    u: MapField
    frame: FrameField                 # on the padded grid
    omega_grid: LogPolarGrid
    w: ComplexField                   # on the padded grid, so(k) x C
    report: CoulombReport
    diagnostics: dict = field(default_factory=dict)
    B: ComplexField | None = None
    b_result: "BResult | None" = None
    A: ComplexField | None = None
    tau1: ComplexField | None = None
    G: ComplexField | None = None
    G1: ComplexField | None = None
    G2: ComplexField | None = None

    def w_on_omega(self) -> ComplexField:
        return _restrict(self.w, self.omega_grid)


def _restrict(f: ComplexField, grid: LogPolarGrid) -> ComplexField:
    """Restrict a padded-grid field back to the original grid rows."""
    pg = f.grid
    i0 = int(round((grid.s_min - pg.s_min) / pg.ds))
    return ComplexField(grid, f.values[i0:i0 + grid.n_s])


def coulomb_gauge(u: MapField, energy_threshold: float = 0.05,
                  tol: float = 1e-4, max_iter: int = 200,
                  pad_s: float = float(np.log(4.0)),
                  initial_rotation: np.ndarray | None = None) -> GaugeData:
    """Gauge-fix the stacked-projector frame of u.

    Requires E(u) <= energy_threshold.  The frame energy is minimized over
    the gauge orbit R exp(psi) on the map's own domain (natural boundary
    conditions), which realizes the interior Coulomb condition
    div((dR^T) R) = 0; the converged frame is then C^1-tapered onto a
    padded grid (pad_s per side) so the gauge potential w has compactly
    supported, smoothly decaying data for the convolution operator.

    Stops when the residual ||grad||_{L^2} / ||dR||_{L^2} drops below tol;
    raises NumericsError (with the residual history) otherwise.
    initial_rotation, an so(k) field on u's grid, lets callers start from a
    rotated point of the same gauge orbit.
    """
    E_u = dirichlet_energy(u)
    if E_u > energy_threshold:
        raise PreconditionError(
            f"E(u) = {E_u:.4f} exceeds the small-energy threshold "
            f"{energy_threshold} for gauge fixing")
    grid = u.grid
    R0 = initial_frame(u)
    R = _orthonormalize_columns(R0.values)
    if initial_rotation is not None:
        R = R @ _expm_skew(initial_rotation)

    hist_e, hist_r = [], []
    grad, _, e_flat = _frame_gradient(grid, R)
    denom = np.sqrt(2.0 * e_flat) + 1e-300
    step = 1.0
    it = 0
    res_rel = np.inf
    for it in range(1, max_iter + 1):
        res = np.sqrt((grad**2).sum() * grid.ds * grid.dtheta)
        res_rel = res / denom
        hist_e.append(e_flat)
        hist_r.append(res_rel)
        if res_rel <= tol:
            break
        # Newton-like step: the preconditioner inverts the (negative
        # definite) flat Laplacian, an approximation of minus the Hessian
        eta = _poisson_precondition(grid, grad)
        dd = float((grad * eta).sum() * grid.ds * grid.dtheta)
        if dd >= 0:  # not a descent direction (should not happen)
            break
        accepted = False
        for _ in range(30):
            trial = R @ _expm_skew(_skew(step * eta))
            g2, _, e2 = _frame_gradient(grid, trial)
            if e2 <= e_flat + 0.25 * step * dd:  # Armijo decrease
                R, grad, e_flat = trial, g2, e2
                accepted = True
                step = min(step * 1.2, 2.0)
                break
            step *= 0.5
        if not accepted:
            break
        denom = np.sqrt(2.0 * e_flat) + 1e-300
    if res_rel > tol:
        raise NumericsError(
            f"Coulomb gauge did not reach residual {tol:.0e} "
            f"(got {res_rel:.2e} after {it} iterations)", history=hist_r)

    pgrid, R = _extend_frame_c1(grid, R, pad_s)
    R = _orthonormalize_columns(R)
    n_pad = (pgrid.n_s - grid.n_s) // 2
    omega_rows = slice(n_pad, n_pad + grid.n_s)

    # gauge potential w = (dR^T/dzbar) R, projected to exact antisymmetry
    Rs = _d_s(R, pgrid.ds, 1)
    Rt = _d_theta(R, 1)
    phase = np.exp(-(pgrid.s[:, None] - 1j * pgrid.theta[None, :]))
    dzbarR = 0.5 * phase[..., None, None] * (Rs + 1j * Rt)
    w_raw = np.einsum("...ai,...aj->...ij", dzbarR, R)
    antisym_defect = float(np.max(np.abs(w_raw + np.swapaxes(w_raw, -1, -2))))
    w_vals = _skew(w_raw)

    # diagnostics: Lorentz control of the connection
    Rx = 2.0 * (0.5 * phase[..., None, None].conj()
                * (Rs - 1j * Rt)).real  # d_x R via dz + dzbar
    Ry = -2.0 * (0.5 * phase[..., None, None].conj() * (Rs - 1j * Rt)).imag
    Mx = np.einsum("...ai,...aj->...ij", Rx, R)
    My = np.einsum("...ai,...aj->...ij", Ry, R)
    dRtR_mag = np.sqrt((Mx**2 + My**2).sum(axis=(-1, -2)))
    # continuum-form Coulomb defect div((dR^T) R) over the original rows
    Ms_c = np.einsum("...ai,...aj->...ij", Rs, R)
    Mt_c = np.einsum("...ai,...aj->...ij", Rt, R)
    div_c = _d_s(Ms_c, pgrid.ds, 1) + _d_theta(Mt_c, 1)
    res_cont = np.sqrt(((div_c[omega_rows] ** 2).sum())
                       * pgrid.ds * pgrid.dtheta) / denom

    w_field = ComplexField(pgrid, w_vals)
    frame = FrameField(pgrid, R)
    tail_rows_e = _flat_energy_rows(pgrid, R, omega_rows)
    report = CoulombReport(it, float(res_rel), e_flat, hist_e, hist_r,
                           truncation_tail=tail_rows_e)
    diag = {
        "energy_u": E_u,
        "frame_energy": e_flat,
        "w_antisym_defect_pre_projection": antisym_defect,
        "w_lorentz_21": lorentz_21(pgrid, w_vals),
        "dRtR_lorentz_21": lorentz_21(pgrid, dRtR_mag),
        "coulomb_residual_rel": float(res_rel),
        "coulomb_residual_continuum_rel": float(res_cont),
        "iterations": it,
    }
    return GaugeData(u=u, frame=frame, omega_grid=u.grid, w=w_field,
                     report=report, diagnostics=diag)


def _flat_energy_rows(grid, R, omega_rows) -> float:
    """Frame energy carried outside the original domain rows (tail bar)."""
    vs = _d_s(R, grid.ds, 1)
    vt = _d_theta(R, 1)
    dens = (vs**2 + vt**2).sum(axis=(-1, -2))
    mask = np.ones(grid.n_s, dtype=bool)
    mask[omega_rows] = False
    return float(0.5 * dens[mask].sum() * grid.ds * grid.dtheta)


# ---------------------------------------------------------------------------
# the operator T and the fixed point B
# ---------------------------------------------------------------------------

@dataclass
class BResult:
    B: ComplexField                   # on the gauge (padded) grid
    T_norm_estimate: float
    T_norm_lorentz_bound: float       # C ||w||_{L^{2,1}} with C = 1 reported
    iterations: int
    iterate_ratios: list
    orthogonality_defect: float       # max |B^T B - I|
    dzbar_residual_l1: float          # ||dzbar B - w B||_{L^1} on omega rows
    deviation_sup: float              # max |B - I|


def _estimate_T_norm(w_cart: np.ndarray, cart: CartesianGrid, k: int,
                     rng: np.random.Generator, probes: int = 2,
                     iters: int = 1) -> float:
    """Empirical L^inf -> L^inf norm of T(M) = (1/pi z) * (w M)."""
    est = 0.0
    for _ in range(probes):
        M = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        M = np.broadcast_to(M, w_cart.shape).copy()
        for _ in range(iters):
            sup = np.max(np.sqrt((np.abs(M) ** 2).sum(axis=(-1, -2))))
            TM = cartesian_cauchy(np.einsum("...ij,...jk->...ik", w_cart, M),
                                  cart)
            sup_T = np.max(np.sqrt((np.abs(TM) ** 2).sum(axis=(-1, -2))))
            est = max(est, sup_T / (sup + 1e-300))
            M = TM
    return est


def solve_B(w: ComplexField, resolution: int = 512,
            max_norm: float = 1.0 / 3.0, tol: float = 1e-10,
            max_iter: int = 60, seed: int = 0) -> BResult:
    """Fixed point B = I + T(B) of Lemma-style contraction, on w's grid.

    Refuses to run when the estimated operator norm exceeds max_norm (1/3 by
    default, the contraction hypothesis).  The iteration runs on a Cartesian
    grid; the result is resampled back with its postcondition diagnostics.
    """
    k = w.values.shape[-1]
    half = 1.02 * (abs(w.grid.center) + w.grid.r_outer)
    cart = CartesianGrid(int(resolution), float(half))
    w_cart = sample_to_cartesian(w, cart)
    rng = np.random.default_rng(seed)
    t_est = _estimate_T_norm(w_cart, cart, k, rng)
    t_lorentz = lorentz_21(w.grid, w.values)
    if t_est > max_norm:
        raise PreconditionError(
            f"estimated ||T|| = {t_est:.3f} exceeds {max_norm:.3f}; the "
            f"fixed-point hypothesis fails (energy too large)")

    eye = np.broadcast_to(np.eye(k, dtype=complex), w_cart.shape)
    B = eye.copy()
    ratios = []
    prev_delta = None
    it = 0
    for it in range(1, max_iter + 1):
        TB = cartesian_cauchy(np.einsum("...ij,...jk->...ik", w_cart, B),
                              cart)
        B_next = eye + TB
        delta = float(np.max(np.abs(B_next - B)))
        if prev_delta is not None and prev_delta > 0:
            ratios.append(delta / prev_delta)
        prev_delta = delta
        B = B_next
        if delta < tol:
            break
    else:
        if prev_delta is not None and prev_delta > 1e-6:
            raise NumericsError(
                f"fixed-point iteration stagnated at delta {prev_delta:.2e}",
                history=ratios)

    B_field = sample_from_cartesian(B, cart, w.grid)
    # postcondition diagnostics on the source grid
    ortho = float(np.max(np.abs(
        np.einsum("...ji,...jk->...ik", B_field.values, B_field.values)
        - np.eye(k))))
    dev = float(np.max(np.abs(B_field.values - np.eye(k))))
    bb = differentiate(B_field)
    resid = bb.d_zbar - np.einsum("...ij,...jk->...ik", w.values,
                                  B_field.values)
    resid_mag = np.sqrt((np.abs(resid) ** 2).sum(axis=(-1, -2)))
    resid_l1 = integrate(w.grid, resid_mag)
    return BResult(B_field, float(t_est), float(t_lorentz), it, ratios,
                   ortho, float(resid_l1), dev)


def _b_inverse(B: np.ndarray, ortho_defect: float) -> np.ndarray:
    """B^{-1}: transpose when B^T B = I holds numerically, else solve."""
    if ortho_defect <= 1e-5:
        return np.swapaxes(B, -1, -2)
    eye = np.broadcast_to(np.eye(B.shape[-1], dtype=complex), B.shape)
    return np.linalg.solve(B, eye.copy())


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def decompose(gauge: GaugeData, b_result: BResult | None = None,
              region: Region | None = None,
              resolution: int = 512) -> GaugeData:
    """Complete the pipeline: A, tau1, G = B^{-1} A, G2, G1 = G - G2.

    region defaults to the whole original domain Omega; G2 is the Cauchy
    transform of B^{-1} tau1 restricted to it.
    """
    u = gauge.u
    grid = gauge.omega_grid
    if region is None:
        region = whole_grid(grid)
    if b_result is None:
        b_result = solve_B(gauge.w, resolution=resolution)
    gauge.b_result = b_result
    gauge.B = _restrict(b_result.B, grid)

    R = _restrict_frame(gauge.frame, grid)
    bundle = differentiate(u)
    tau = tension(u, bundle)
    k = u.ambient_dim
    du_stack = np.concatenate([bundle.d_z,
                               np.zeros_like(bundle.d_z)], axis=-1)
    tau_stack = np.concatenate([tau.field, np.zeros_like(tau.field)], axis=-1)
    A_vals = np.einsum("...ai,...a->...i", R, du_stack)
    tau1_vals = 0.25 * np.einsum("...ai,...a->...i", R, tau_stack)
    A = ComplexField(grid, A_vals)
    tau1 = ComplexField(grid, tau1_vals.astype(complex))

    # gauge equation residual, reported relative to ||A||_{L^1}
    w_om = gauge.w_on_omega()
    dA = differentiate(A)
    gauge_resid = dA.d_zbar - np.einsum(
        "...ij,...j->...i", w_om.values, A_vals) - tau1.values
    resid_mag = np.sqrt((np.abs(gauge_resid) ** 2).sum(axis=-1))
    A_mag = np.sqrt((np.abs(A_vals) ** 2).sum(axis=-1))
    eq_resid_l1 = integrate(grid, resid_mag, region)
    eq_scale_l1 = integrate(grid, A_mag, region)

    Binv = _b_inverse(gauge.B.values, b_result.orthogonality_defect)
    G_vals = np.einsum("...ij,...j->...i", Binv, A_vals)
    mask = region.mask(grid).astype(float)
    src = ComplexField(grid, np.einsum(
        "...ij,...j->...i", Binv, tau1.values) * mask[..., None])
    from .cauchy import cauchy_transform
    G2 = cauchy_transform(src, grid, resolution=resolution)
    G1_vals = G_vals - G2.values
    G1 = ComplexField(grid, G1_vals)

    dG1 = differentiate(G1)
    g1_resid = integrate(grid, np.sqrt((np.abs(dG1.d_zbar) ** 2).sum(axis=-1)),
                         region)

    p = 1.2
    q_exp = 2 * p / (2 - p)
    gauge.A, gauge.tau1, gauge.G = A, tau1, ComplexField(grid, G_vals)
    gauge.G1, gauge.G2 = G1, G2
    gauge.diagnostics.update({
        "gauge_equation_residual_l1": float(eq_resid_l1),
        "gauge_equation_scale_l1": float(eq_scale_l1),
        "gauge_equation_residual_rel": float(eq_resid_l1
                                             / (eq_scale_l1 + 1e-300)),
        "dzbar_G1_l1": float(g1_resid),
        "T_norm_estimate": b_result.T_norm_estimate,
        "B_orthogonality_defect": b_result.orthogonality_defect,
        "G2_l_2p_over_2mp": lp_norm(grid, G2.values, q_exp, region),
        "tau_lp": lp_norm(grid, tau.field, p, region),
    })
    return gauge


def _restrict_frame(frame: FrameField, grid: LogPolarGrid) -> np.ndarray:
    pg = frame.grid
    i0 = int(round((grid.s_min - pg.s_min) / pg.ds))
    return frame.values[i0:i0 + grid.n_s]
