"""Bubble extraction and the quantitative blow-up measurements.

The concentration function Q(t) = sup over disks of radius t of the energy
drives the selection of bubble centers and scales; extraction recurses on
rescaled sequences until no concentration point carries mass >= eps_N, with
the energy-drop argument enforced as a hard assertion.  The energy ledger
partitions the disk exactly into body, bubble and neck regions (half-open
masks on the same grid, so additivity holds to roundoff) and reports the
energy-identity deficit; neck metrics and the log-rho decay fits quantify
the neck estimates.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError, NumericsError
from .fields import MapField, energy, energy_density, hopf, oscillation, \
    rescale
from .grid import Region, disk, integrate, make_grid

__all__ = [
    "ConcentrationScanner", "concentration_function", "BubbleNode",
    "BubbleTree", "extract_bubbles", "LedgerRow", "energy_ledger",
    "NeckMetrics", "neck_metrics", "decay_fit", "DecayFit",
]


# ---------------------------------------------------------------------------
# concentration function
# ---------------------------------------------------------------------------

class ConcentrationScanner:
    """Evaluates Q(t) = sup_{D(z,t) in domain} E(u, D(z, t)) for one map.

    Candidate centers come from a mass raster (coarse disk convolution,
    then local refinement at spacing <= t/8); the returned value is the
    exact masked quadrature at the best center, so it is an achieved lower
    bound of the true sup, under-estimating by at most an O(t/8) shell.
    Previously found centers are retained, which keeps Q monotone across
    increasing queries.
    """

    def __init__(self, u: MapField, domain: Region):
        self.domain = domain
        e = energy_density(u)
        m = domain.mask(u.grid)
        w = u.grid.weights
        self.mass = (e * w)[m].astype(float)
        z = u.grid.nodes[m]
        self.x = z.real.copy()
        self.y = z.imag.copy()
        self.center = complex(domain.center)
        self.radius = float(domain.r_out)
        self._kept: list[complex] = []

    def _feasible(self, c: np.ndarray, t: float) -> np.ndarray:
        """Pull centers radially so D(c, t) stays inside the domain disk."""
        rel = c - self.center
        lim = max(self.radius - t, 0.0)
        rr = np.abs(rel)
        pull = np.where(rr > lim, lim / np.where(rr == 0, 1.0, rr), 1.0)
        return self.center + rel * pull

    def disk_energy(self, c: complex, t: float) -> float:
        d2 = (self.x - c.real) ** 2 + (self.y - c.imag) ** 2
        return float(self.mass[d2 < t * t].sum())

    def _candidates(self, t: float) -> np.ndarray:
        if self.mass.size == 0:
            return np.asarray([self.center])
        xmin, xmax = self.x.min(), self.x.max()
        ymin, ymax = self.y.min(), self.y.max()
        span = max(xmax - xmin, ymax - ymin, 2 * t, 1e-12)
        h = max(t / 8.0, span / 1024.0)
        nx = int((xmax - xmin) / h) + 3
        ny = int((ymax - ymin) / h) + 3
        ix = np.clip(((self.x - xmin) / h + 1).astype(int), 0, nx - 1)
        iy = np.clip(((self.y - ymin) / h + 1).astype(int), 0, ny - 1)
        raster = np.zeros((ny, nx))
        np.add.at(raster, (iy, ix), self.mass)
        kr = int(np.ceil((t + 1.5 * h) / h))
        ax = np.arange(-kr, kr + 1)
        kernel = ((ax[None, :] ** 2 + ax[:, None] ** 2)
                  <= kr * kr).astype(float)
        sums = fftconvolve(raster, kernel, mode="same")
        top = np.argsort(sums.ravel())[-6:]
        cy, cx = np.unravel_index(top, sums.shape)
        base = (xmin + (cx - 1) * h) + 1j * (ymin + (cy - 1) * h)
        off = np.linspace(-1.0, 1.0, 9) * 4.0 * max(t / 8.0, h / 2)
        grid_off = (off[None, :] + 1j * off[:, None]).ravel()
        cand = (base[:, None] + grid_off[None, :]).ravel()
        return np.concatenate([cand, np.asarray(self._kept, dtype=complex),
                               [self.center]])

    def query(self, t: float, keep: bool = True) -> tuple[float, complex]:
        if t <= 0:
            return 0.0, self.center
        if t > 2 * self.radius:
            raise ConfigError(f"disk radius {t} exceeds the domain")
        cand = self._feasible(np.unique(self._candidates(t)), t)
        best_e, best_c = -1.0, self.center
        for c in cand:
            e = self.disk_energy(complex(c), t)
            if e > best_e:
                best_e, best_c = e, complex(c)
        if keep:
            self._kept.append(best_c)
            if len(self._kept) > 64:
                del self._kept[:-64]
        return best_e, best_c


def concentration_function(u: MapField, t: float, domain: Region) -> float:
    """Q(t) over the domain disk (one-shot; see ConcentrationScanner)."""
    if t <= 0:
        raise ConfigError("radius t must be positive")
    q, _ = ConcentrationScanner(u, domain).query(t, keep=False)
    return q


# ---------------------------------------------------------------------------
# bubble tree
# ---------------------------------------------------------------------------

@dataclass
class BubbleNode:
    index: int
    parent: int
    centers: list            # x_n per sequence index (complex, absolute)
    radii: list              # selection radii r_n per sequence index
    scales: list             # half-energy bubble scales per sequence index
    mass: float              # concentrated energy m_i at the finest index
    delta: float             # the delta used at selection (parent chart)
    children: list = field(default_factory=list)


@dataclass
class BubbleTree:
    nodes: list              # BubbleNode, index 0 = root (body)
    eps: float
    eps_N: float
    n_count: int
    depth: int

    @property
    def k0(self) -> int:
        return len(self.nodes) - 1

    def parent_map(self) -> dict:
        return {n.index: n.parent for n in self.nodes if n.index > 0}

    def separation(self, n_idx: int) -> float:
        """min over pairs of  r_i/r_j + r_j/r_i + |x_i - x_j|/(r_i + r_j)."""
        vals = []
        live = [n for n in self.nodes if n.index > 0]
        for i, a in enumerate(live):
            for b in live[i + 1:]:
                ri, rj = a.scales[n_idx], b.scales[n_idx]
                xi, xj = a.centers[n_idx], b.centers[n_idx]
                vals.append(ri / rj + rj / ri + abs(xi - xj) / (ri + rj))
        return min(vals) if vals else np.inf

    def to_json_dict(self) -> dict:
        return {
            "k0": self.k0,
            "eps": self.eps,
            "eps_N": self.eps_N,
            "depth": self.depth,
            "nodes": [
                {"index": n.index, "parent": n.parent,
                 "centers": [[c.real, c.imag] for c in n.centers],
                 "radii": list(map(float, n.radii)),
                 "scales": list(map(float, n.scales)),
                 "mass": n.mass, "delta": n.delta}
                for n in self.nodes if n.index > 0],
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)


def _plateau_delta(u: MapField, center: complex, cap: float,
                   eps: float) -> float:
    """Smallest dyadic delta whose boundary shell carries < eps/8 energy."""
    deltas = cap * 2.0 ** -np.arange(0, 12)
    prev = None
    chosen = cap
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # probing below the grid core is fine
        for d in deltas:
            e = energy(u, disk(center, d))
            if prev is not None and prev - e <= eps / 8.0:
                chosen = 2 * d  # the previous (larger) delta plateaued
                break
            prev = e
            chosen = d
    return float(min(chosen, cap))


def _bisect_scale(scanner: ConcentrationScanner, target: float,
                  delta: float, t_min: float, iters: int = 30):
    lo, hi = min(t_min, delta / 2), delta
    q_hi, c_hi = scanner.query(hi)
    best = (hi, c_hi)
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        q, c = scanner.query(mid)
        if q >= target:
            hi, best = mid, (mid, c)
        else:
            lo = mid
        if hi / lo < 1.02:
            break
    return best


def _half_energy_scale(u: MapField, center: complex, mass: float,
                       r_hi: float, r_lo: float) -> float:
    lo, hi = min(r_lo, r_hi / 2), r_hi
    for _ in range(40):
        mid = np.sqrt(lo * hi)
        if energy(u, disk(center, mid)) >= 0.5 * mass:
            hi = mid
        else:
            lo = mid
        if hi / lo < 1.01:
            break
    return float(np.sqrt(lo * hi))


def extract_bubbles(fields: list[MapField], eps: float, eps_N: float,
                    domain: Region | None = None,
                    work_radius: float = 8.0,
                    child_n_theta: int = 64,
                    max_levels: int | None = None) -> BubbleTree:
    """Recursive bubble extraction from the map sequence.

    fields is ordered by the family index n; the finest map drives the
    plateau and blow-up detection, and the per-n selection solves
    Q_n(r) = max(Q_n(delta) - eps, eps/2) by bisection.  Each level works
    on the sequence rescaled by its own per-n selection; per-n affine
    charts (offset, scale) compose back to absolute coordinates.
    Recursion stops when no concentration point holds energy >= eps_N;
    exceeding the energy-drop level bound raises NumericsError.
    """
    if eps >= eps_N:
        raise ConfigError("need eps < eps_N")
    if len(fields) < 3:
        raise ConfigError("need at least 3 sequence indices")
    if domain is None:
        domain = disk(0j, 1.0)
    total = max(energy(f, domain) for f in fields)
    if max_levels is None:
        max_levels = int(np.ceil(max(total, eps_N) / eps_N)) + 1

    n_count = len(fields)
    nodes = [BubbleNode(0, -1, [complex(domain.center)] * n_count,
                        [float(domain.r_out)] * n_count,
                        [float(domain.r_out)] * n_count,
                        mass=float(total), delta=float(domain.r_out))]
    depth_seen = 0

    def recurse(seq, charts, center, cap, parent_idx, parent_mass, depth):
        nonlocal depth_seen
        depth_seen = max(depth_seen, depth)
        if depth >= max_levels:
            raise NumericsError(
                f"bubble recursion exceeded {max_levels} levels; the "
                f"energy-drop argument guarantees termination, so either "
                f"the specimen violates the L^p hypothesis or eps_N is "
                f"miscalibrated")
        u_fin = seq[-1]
        delta = _plateau_delta(u_fin, center, cap, eps)
        m_here = energy(u_fin, disk(center, delta))
        if m_here < eps_N:
            return
        if depth > 0:
            drop_cap = max(parent_mass - 0.75 * eps, 0.5 * eps)
            if m_here > drop_cap + 0.25 * eps:
                raise NumericsError(
                    f"energy-drop violated: child mass {m_here:.4f} vs "
                    f"allowed {drop_cap:.4f}")

        node_idx = len(nodes)
        rel_centers, rel_radii, sel_masses = [], [], []
        for i, u_n in enumerate(seq):
            delta_i = min(delta, 0.8 * (u_n.grid.r_outer - abs(center)))
            scanner = ConcentrationScanner(u_n, disk(center, delta_i))
            q_delta = energy(u_n, disk(center, delta_i))
            target = max(q_delta - eps, 0.5 * eps)
            t_min = 3.0 * u_n.grid.r_inner
            r_sel, c_sel = _bisect_scale(scanner, target, delta_i, t_min)
            rel_centers.append(c_sel)
            rel_radii.append(r_sel)
            sel_masses.append(scanner.disk_energy(c_sel, r_sel))

        # rescale the sequence by its own selection; the work window is
        # clipped to what each source grid can serve so the sub-sequence
        # stays aligned with the family index
        sub_seq, sub_charts = [], []
        for i, u_n in enumerate(seq):
            rel_inner = 3.0 * u_n.grid.r_inner / rel_radii[i]
            src_cap = 0.9 * (u_n.grid.r_outer - abs(rel_centers[i])) \
                / rel_radii[i]
            s_lo = np.log(max(rel_inner, 1e-7))
            s_hi = max(np.log(min(work_radius, max(src_cap, 1e-9))),
                       s_lo + 0.5)
            n_s = max(32, int((s_hi - s_lo) / 0.03))
            g = make_grid(s_lo, s_hi, n_s, child_n_theta)
            v = rescale(u_n, rel_centers[i], rel_radii[i], g)
            off, sc = charts[i]
            sub_seq.append(v)
            sub_charts.append((off + sc * rel_centers[i],
                               sc * rel_radii[i]))

        # deeper concentration mass (finest index) before fixing scales.
        # The probe radius sits well inside this node's own bubble profile
        # (a tenth of its uncorrected half-energy scale), so the node's own
        # smooth core cannot trip the threshold while any concentration at
        # vanishing relative scale keeps its full mass below the probe.
        m_deep, c_deep = 0.0, 0j
        if len(sub_seq) >= 3:
            t_fin = 3.0 * seq[-1].grid.r_inner
            prelim = _half_energy_scale(seq[-1], rel_centers[-1],
                                        sel_masses[-1], rel_radii[-1],
                                        t_fin / 3) / rel_radii[-1]
            t_probe = max(0.1 * prelim,
                          6.0 * sub_seq[-1].grid.r_inner)
            scan = ConcentrationScanner(sub_seq[-1],
                                        disk(0j, 0.75 * work_radius))
            m_deep, c_deep = scan.query(t_probe, keep=False)
            if m_deep < 0.9 * eps_N:
                m_deep = 0.0

        centers, radii, scales = [], [], []
        for i, u_n in enumerate(seq):
            t_min = 3.0 * u_n.grid.r_inner
            r_half = _half_energy_scale(
                u_n, rel_centers[i],
                min(sel_masses[i] + m_deep, 2 * sel_masses[i]),
                rel_radii[i], t_min / 3)
            off, sc = charts[i]
            centers.append(off + sc * rel_centers[i])
            radii.append(sc * rel_radii[i])
            scales.append(sc * r_half)
        node = BubbleNode(node_idx, parent_idx, centers, radii, scales,
                          mass=float(m_here), delta=float(delta))
        nodes.append(node)
        nodes[parent_idx].children.append(node_idx)

        if m_deep > 0.0:
            recurse(sub_seq, sub_charts, c_deep, 0.5 * work_radius,
                    node_idx, m_here, depth + 1)

    identity = [(0j, 1.0)] * n_count
    recurse(fields, identity, complex(domain.center),
            0.9 * float(domain.r_out), 0, float(total), 0)

    tree = BubbleTree(nodes, eps, eps_N, n_count, depth_seen)
    _check_tree(tree)
    return tree


def _check_tree(tree: BubbleTree):
    for n in tree.nodes[1:]:
        if not (0 <= n.parent < n.index):
            raise NumericsError(f"parent order violated at node {n.index}")
        if n.mass < tree.eps_N:
            raise NumericsError(f"node {n.index} mass below eps_N")


def _descendants(tree: BubbleTree, idx: int) -> set:
    out = set()
    stack = list(tree.nodes[idx].children)
    while stack:
        c = stack.pop()
        out.add(c)
        stack.extend(tree.nodes[c].children)
    return out


# ---------------------------------------------------------------------------
# energy ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LedgerRow:
    n: int
    total: float
    body: float
    bubbles: tuple
    necks: tuple
    deficit: float              # total - body - sum(bubbles) - sum(necks)
    identity_deficit: float     # |total - E(weak limit) - sum E(w^i)|
    hopf_mass: float            # ||h||_{L^1} over the first root-child delta

    @property
    def neck_total(self) -> float:
        return float(sum(self.necks))


def energy_ledger(tree: BubbleTree, fields: list[MapField],
                  weak_limit_energy: float, bubble_energies: list[float],
                  delta: float = 0.25, R: float = 4.0,
                  domain: Region | None = None) -> list[LedgerRow]:
    """Per-n exact energy bookkeeping over the tree's regions.

    Regions (all half-open in the radius) partition the domain disk node
    by node: the body is the domain minus the root children's delta-disks,
    node j keeps D(x_j, r_j R) minus its children's r_j delta-disks, and
    node j's neck is D(x_j, r_{f(j)} delta) \\ D(x_j, r_j R).  Masks are
    evaluated on each u_n's own grid, so additivity is exact up to
    roundoff; overlapping regions raise a structural error.
    """
    if domain is None:
        domain = disk(0j, 1.0)
    if len(bubble_energies) != tree.k0:
        raise ConfigError("bubble energy list does not match the tree")
    rows = []
    live = [n for n in tree.nodes if n.index > 0]
    for i_n, u in enumerate(fields):
        grid = u.grid
        e_w = energy_density(u) * grid.weights
        zs = grid.nodes
        dom = domain.mask(grid)
        total = float(e_w[dom].sum())

        assigned = np.full(grid.shape, -1, dtype=int)
        descendants = {n.index: _descendants(tree, n.index) for n in live}
        neck_vals, bub_vals = [], []
        # deepest nodes first so parents subtract children cleanly
        for node in sorted(live, key=lambda m: -m.index):
            x = node.centers[i_n]
            r_node = node.scales[i_n]
            parent = tree.nodes[node.parent]
            r_parent = parent.scales[i_n] if node.parent > 0 else 1.0
            inner = np.abs(zs - x) < r_node * R
            outer = np.abs(zs - x) < r_parent * delta
            taken = assigned[(outer | inner) & (assigned >= 0)]
            if len(taken) and not set(np.unique(taken)).issubset(
                    descendants[node.index]):
                raise NumericsError(
                    f"ledger regions of node {node.index} overlap a "
                    f"non-descendant: separation violated")
            free = assigned < 0
            neck_m = outer & ~inner & dom & free
            bub_m = inner & dom & free
            neck_vals.append(float(e_w[neck_m].sum()))
            bub_vals.append(float(e_w[bub_m].sum()))
            assigned[(outer | inner) & free] = node.index
        body_m = dom & (assigned < 0)
        body = float(e_w[body_m].sum())
        deficit = total - body - sum(bub_vals) - sum(neck_vals)

        identity_deficit = abs(total - weak_limit_energy
                               - float(sum(bubble_energies)))
        if live:
            x1 = live[0].centers[i_n]
            h = hopf(u)
            hopf_mass = integrate(grid, np.abs(h.values), disk(x1, delta))
        else:
            h = hopf(u)
            hopf_mass = integrate(grid, np.abs(h.values),
                                  disk(domain.center, delta))
        rows.append(LedgerRow(i_n, total, body, tuple(bub_vals[::-1]),
                              tuple(neck_vals[::-1]), float(deficit),
                              float(identity_deficit), float(hopf_mass)))
    return rows


# ---------------------------------------------------------------------------
# neck metrics and decay fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeckMetrics:
    center: complex
    r_in: float
    r_out: float
    energy: float
    oscillation: float
    tangential_energy: float    # int r^{-2} |d_theta u|^2 over the annulus
    hopf_mass: float            # ||h||_{L^1(D(center, hopf_delta))}
    hopf_delta: float


def neck_metrics(u: MapField, center: complex, r_in: float, r_out: float,
                 hopf_delta: float | None = None,
                 n_theta: int = 64) -> NeckMetrics:
    """Energy, oscillation, tangential energy, and Hopf mass of a neck.

    The map is resampled onto a log-polar grid centered at the neck so the
    angular derivative is native; the tangential energy is the flat
    integral of |d_theta u|^2 in (s, theta).
    """
    if hopf_delta is None:
        hopf_delta = r_out
    src_inner = 1.5 * u.grid.r_inner
    s_lo = np.log(max(min(r_in / 4.0, hopf_delta / 50.0), src_inner))
    s_hi = np.log(r_out)
    if s_hi <= s_lo:
        raise ConfigError("neck annulus escapes the source grid")
    n_s = max(48, int((s_hi - s_lo) / 0.02))
    g = make_grid(s_lo, s_hi, n_s, n_theta, center=center)
    if abs(center - u.grid.center) < 1e-15 and g.n_theta == u.grid.n_theta \
            and abs(g.s_min - u.grid.s_min) < 1e-12 \
            and g.n_s == u.grid.n_s:
        v = u
    else:
        v = rescale(u, center, 1.0, g)
    ann = Region("annulus", center, r_in, r_out)
    e = energy(v, ann)
    osc = oscillation(v, ann)
    from .fields import differentiate
    b = differentiate(v)
    tang_density = np.sum(b.d_theta ** 2, axis=-1)
    mask = ann.mask(g)
    tang = float((tang_density[mask]).sum() * g.ds * g.dtheta)
    h = hopf(v)
    hopf_mass = integrate(g, np.abs(h.values), disk(center, hopf_delta))
    return NeckMetrics(complex(center), float(r_in), float(r_out),
                       float(e), float(osc), tang, float(hopf_mass),
                       float(hopf_delta))


@dataclass(frozen=True)
class DecayFit:
    rhos: tuple
    values: tuple
    subtracted: tuple
    slope: float
    slope_raw: float
    energy_target: float        # (4p - 4)/p
    oscillation_target: float   # (2p - 2)/p


def decay_fit(rhos, values, A0: float, r: float, p: float,
              subtract: bool = True) -> DecayFit:
    """Least-squares slope of ln(value) vs ln(rho).

    With subtract=True the measured (A0 + r) ln(rho^2 / r) term is removed
    first (points driven nonpositive by the subtraction are dropped).
    Returns both slopes and the theoretical targets for the exponent p.
    """
    rhos = np.asarray(list(rhos), dtype=float)
    values = np.asarray(list(values), dtype=float)
    if len(rhos) < 4:
        raise ConfigError("need at least 4 rho samples")
    if np.any(np.diff(rhos) <= 0):
        raise ConfigError("rho samples must increase")

    def _slope(x, y):
        A = np.vstack([np.log(x), np.ones_like(x)]).T
        return float(np.linalg.lstsq(A, np.log(y), rcond=None)[0][0])

    slope_raw = _slope(rhos, np.maximum(values, 1e-300))
    sub = values - (A0 + r) * np.log(rhos**2 / r)
    keep = sub > 0
    slope = _slope(rhos[keep], sub[keep]) if keep.sum() >= 2 else np.nan
    return DecayFit(tuple(rhos), tuple(values),
                    tuple(np.where(keep, sub, np.nan)),
                    slope if subtract else slope_raw, slope_raw,
                    (4 * p - 4) / p, (2 * p - 2) / p)
