"""Experiment orchestration: generate -> extract -> measure -> fit -> emit.

Each stage is isolated: a failing stage records its error and downstream
tables are simply absent, never fabricated.  All CSV payloads are kept in
results.json as well, so reports can be re-emitted without recomputation.
"""

from __future__ import annotations

import time

import numpy as np

from . import holo
from .bubbletree import (BubbleNode, BubbleTree, decay_fit, energy_ledger,
                         neck_metrics, extract_bubbles)
from .cauchy import cauchy_transform
from .config import ExperimentConfig, rho_values
from .errors import ConfigError, NumericsError
from .fields import ComplexField, MapField, energy, hopf, tension
from .gauge import coulomb_gauge, decompose, solve_B
from .generators import geodesic_neck, glue_sequence, family_grid
from .grid import annulus, disk, make_grid
from .norms import lp_norm
from .reports import ensure_dir, write_csv, write_summary

LEDGER_COLUMNS = ["n", "E_total", "E_body", "E_bubbles", "E_necks",
                  "deficit", "identity_deficit", "hopf_mass"]
NECK_COLUMNS = ["n", "node", "rho", "r_in", "r_out", "energy",
                "oscillation", "tangential_energy", "hopf_mass"]
TENSION_COLUMNS = ["n", "tau_l1", "tau_lp", "p"]
LAURENT_COLUMNS = ["order", "magnitude", "bound", "ratio"]
VERIFY_COLUMNS = ["check", "value", "expected", "tolerance", "status"]


# ---------------------------------------------------------------------------
# verify: the closed-form oracle suite
# ---------------------------------------------------------------------------

def run_verify() -> tuple[list[dict], bool]:
    """Closed-form oracles: monomial norms, Cauchy transform, convexity."""
    rows = []

    def check(name, value, expected, tol, relative=True):
        err = abs(value - expected)
        lim = tol * abs(expected) if relative else tol
        rows.append({"check": name, "value": value, "expected": expected,
                     "tolerance": tol,
                     "status": "pass" if err <= lim else "FAIL"})

    for rho1, rho2 in ((1.0, 0.5), (1.0, 0.1), (0.5, 0.05)):
        span = np.log(rho1 / rho2)
        n_s = max(int(span / 5e-4), 64)
        g = make_grid(np.log(rho2), np.log(rho1), n_s, 16)
        for n in range(-4, 5):
            quad = float(np.sum(g.weights * np.abs(g.nodes) ** (2 * n)))
            check(f"monomial_n{n}_rho{rho1}_{rho2}", quad,
                  holo.monomial_norm(n, rho1, rho2, squared=True), 1e-6)

    # log-convexity of ln ||z^n||^2 at r = 0.1
    vals = [np.log(holo.monomial_norm(n, 1.0, 0.1, squared=True))
            for n in range(-4, 5)]
    second = np.diff(vals, 2)
    check("log_convexity_min_second_diff", float(second.min() >= 0), 1.0,
          0.0, relative=False)

    # Cauchy transform of the unit-disk indicator against zbar / 1/z
    ds = 0.01
    g = make_grid(-ds * 700, ds * 70, 770, 128)
    ind = (np.abs(g.nodes) < 1.0).astype(complex)
    f = ComplexField(g, ind)
    gfield = cauchy_transform(f, resolution=1024, supersample=2)
    z = g.nodes
    exact = np.where(np.abs(z) <= 1.0, np.conj(z), 1.0 / z)
    sup = float(np.max(np.abs(gfield.values - exact)))
    check("cauchy_indicator_sup_error", sup, 0.0, 1e-3, relative=False)

    ok = all(r["status"] == "pass" for r in rows)
    return rows, ok


# ---------------------------------------------------------------------------
# sequence experiments
# ---------------------------------------------------------------------------

def _metadata_tree(glued_maps, eps, eps_N) -> BubbleTree:
    """Ground-truth tree from generator metadata (for sharpness families,
    whose extraction the theorem's failure makes non-terminating)."""
    n_count = len(glued_maps)
    nodes = [BubbleNode(0, -1, [0j] * n_count, [1.0] * n_count,
                        [1.0] * n_count, mass=float("nan"), delta=1.0)]
    per_n_bubbles = [gm.bubbles for gm in glued_maps]
    k0 = len(per_n_bubbles[0])
    for j in range(k0):
        centers = [per_n_bubbles[i][j].center for i in range(n_count)]
        scales = [per_n_bubbles[i][j].scale for i in range(n_count)]
        info = per_n_bubbles[-1][j]
        nodes.append(BubbleNode(j + 1, info.parent, centers, scales,
                                scales, mass=info.energy, delta=0.25))
        nodes[info.parent].children.append(j + 1)
    return BubbleTree(nodes, eps, eps_N, n_count, depth=1)


def run_sequence(cfg: ExperimentConfig, out_dir: str) -> dict:
    if cfg.family is None:
        raise ConfigError("sequence experiments need a family section")
    ensure_dir(out_dir)
    timings: dict = {}
    results: dict = {"tables": {}, "errors": {}}
    rng_seed = cfg.seed
    spec = cfg.family
    ds = cfg.grid.ds / cfg.resolution_mult

    t0 = time.time()
    glued = [glue_sequence(spec, n,
                           family_grid(spec, n, n_theta=cfg.grid.n_theta,
                                       ds=ds, s_margin=cfg.grid.s_margin,
                                       outer=cfg.grid.outer))
             for n in range(cfg.n_max + 1)]
    fields = [gm.field for gm in glued]
    timings["generate"] = time.time() - t0

    tension_rows = []
    t0 = time.time()
    for n, u in enumerate(fields):
        tau = tension(u).field
        tension_rows.append({
            "n": n,
            "tau_l1": lp_norm(u.grid, tau, 1.0, disk(0j, 1.2)),
            "tau_lp": lp_norm(u.grid, tau, cfg.p, disk(0j, 1.2)),
            "p": cfg.p,
        })
    results["tables"]["tension"] = {"columns": TENSION_COLUMNS,
                                    "rows": tension_rows}
    timings["tension"] = time.time() - t0

    tree = None
    if "tree" in cfg.stages:
        t0 = time.time()
        try:
            if spec.kind in ("sharpness", "fixed_length"):
                tree = _metadata_tree(glued, cfg.eps_value, cfg.eps_N)
                results["tree_source"] = "metadata"
            else:
                tree = extract_bubbles(fields, cfg.eps_value, cfg.eps_N)
                results["tree_source"] = "extraction"
            tree.save(f"{out_dir}/tree.json")
            results["tree"] = tree.to_json_dict()
        except (NumericsError, ConfigError) as exc:
            results["errors"]["tree"] = str(exc)
        timings["tree"] = time.time() - t0

    if "ledger" in cfg.stages and tree is not None:
        t0 = time.time()
        try:
            bubble_energies = [b.energy for b in glued[-1].bubbles]
            rows = energy_ledger(tree, fields,
                                 weak_limit_energy=glued[-1].body_energy,
                                 bubble_energies=bubble_energies,
                                 delta=cfg.neck_delta, R=cfg.neck_R)
            ledger_rows = [{
                "n": r.n, "E_total": r.total, "E_body": r.body,
                "E_bubbles": float(sum(r.bubbles)),
                "E_necks": float(sum(r.necks)),
                "deficit": r.deficit,
                "identity_deficit": r.identity_deficit,
                "hopf_mass": r.hopf_mass,
            } for r in rows]
            results["tables"]["ledger"] = {"columns": LEDGER_COLUMNS,
                                           "rows": ledger_rows}
        except (NumericsError, ConfigError) as exc:
            results["errors"]["ledger"] = str(exc)
        timings["ledger"] = time.time() - t0

    if "necks" in cfg.stages and tree is not None and tree.k0 > 0:
        t0 = time.time()
        try:
            neck_rows = []
            rhos = rho_values(cfg)
            for n, (gm, u) in enumerate(zip(glued, fields)):
                for node in tree.nodes[1:]:
                    x = node.centers[n]
                    r_hat = spec.R0 * node.scales[n] / spec.delta0
                    for rho in rhos:
                        r_in = min(spec.R0 * node.scales[n] / rho,
                                   spec.delta0 * rho * 0.49)
                        r_out = spec.delta0 * rho
                        m = neck_metrics(u, x, r_in, r_out,
                                         hopf_delta=spec.delta0,
                                         n_theta=cfg.grid.n_theta)
                        neck_rows.append({
                            "n": n, "node": node.index, "rho": float(rho),
                            "r_in": m.r_in, "r_out": m.r_out,
                            "energy": m.energy,
                            "oscillation": m.oscillation,
                            "tangential_energy": m.tangential_energy,
                            "hopf_mass": m.hopf_mass,
                        })
            results["tables"]["necks"] = {"columns": NECK_COLUMNS,
                                          "rows": neck_rows}
        except (NumericsError, ConfigError) as exc:
            results["errors"]["necks"] = str(exc)
        timings["necks"] = time.time() - t0

    if "fits" in cfg.stages and "necks" in results["tables"]:
        t0 = time.time()
        try:
            rows = [r for r in results["tables"]["necks"]["rows"]
                    if r["n"] == cfg.n_max and r["node"] == 1]
            rows.sort(key=lambda r: r["rho"])
            rhos = [r["rho"] for r in rows]
            r_lemma = spec.R0 * spec.scale(cfg.n_max) / spec.delta0
            u_fin = fields[-1]
            h_small = hopf(u_fin)
            a0 = (float(np.sum((np.abs(h_small.values)
                                * u_fin.grid.weights)[
                disk(0j, 2 * r_lemma * spec.delta0).mask(u_fin.grid)]))
                + r_lemma ** ((2 * cfg.p - 2) / cfg.p)
                * tension_rows[-1]["tau_lp"])
            fit_e = decay_fit(rhos, [r["energy"] for r in rows],
                              A0=a0, r=r_lemma, p=cfg.p)
            fit_o = decay_fit(rhos, [r["oscillation"] for r in rows],
                              A0=a0, r=r_lemma, p=cfg.p)
            results["fits"] = {
                "A0": a0, "r": r_lemma,
                "energy_slope": fit_e.slope,
                "energy_slope_raw": fit_e.slope_raw,
                "energy_target": fit_e.energy_target,
                "oscillation_slope": fit_o.slope,
                "oscillation_slope_raw": fit_o.slope_raw,
                "oscillation_target": fit_o.oscillation_target,
            }
        except (NumericsError, ConfigError) as exc:
            results["errors"]["fits"] = str(exc)
        timings["fits"] = time.time() - t0

    _emit(cfg, out_dir, timings, results)
    return results


# ---------------------------------------------------------------------------
# single-specimen gauge + holo pipeline
# ---------------------------------------------------------------------------

def run_pipeline(cfg: ExperimentConfig, out_dir: str) -> dict:
    ensure_dir(out_dir)
    timings: dict = {}
    results: dict = {"tables": {}, "errors": {}}
    ds = 0.02 / cfg.resolution_mult

    t0 = time.time()
    if cfg.family is not None:
        gm = glue_sequence(cfg.family, 0,
                           family_grid(cfg.family, 0,
                                       n_theta=cfg.grid.n_theta, ds=ds))
        u = gm.field
    else:
        g = make_grid(np.log(0.05), 0.0, int(3.0 / ds), cfg.grid.n_theta)
        u = geodesic_neck(0.05, g, target=cfg.target)
    timings["generate"] = time.time() - t0

    t0 = time.time()
    try:
        gauge = coulomb_gauge(u, energy_threshold=0.15)
        b_res = solve_B(gauge.w, seed=cfg.seed,
                        resolution=512 * cfg.resolution_mult)
        gauge = decompose(gauge, b_res,
                          resolution=512 * cfg.resolution_mult)
        results["gauge"] = dict(gauge.diagnostics)
        results["gauge"]["B_iterations"] = b_res.iterations
        results["gauge"]["B_deviation_sup"] = b_res.deviation_sup
        results["gauge"]["B_dzbar_residual_l1"] = b_res.dzbar_residual_l1
        results["gauge"]["T_norm_lorentz_bound"] = b_res.T_norm_lorentz_bound
    except (NumericsError, ConfigError) as exc:
        results["errors"]["gauge"] = str(exc)
        gauge = None
    timings["gauge"] = time.time() - t0

    t0 = time.time()
    try:
        h = hopf(u)
        inner = max(u.grid.r_inner * 4.0, 1e-4)
        ann = annulus(0j, max(inner, 0.05), 1.0)
        proj = holo.project_annulus(h, ann)
        a0 = proj.error_l1
        diag = holo.neck_diagnostics(h, ann, A0=max(a0, 1e-14), p=cfg.p)
        laurent_rows = [{"order": n, "magnitude": mag, "bound": bound,
                         "ratio": ratio}
                        for n, mag, bound, ratio in diag.summary_rows()]
        results["tables"]["laurent"] = {"columns": LAURENT_COLUMNS,
                                        "rows": laurent_rows}
        results["holo"] = {"projection_error_l1": proj.error_l1,
                           "ratio_b1": diag.ratio_b1,
                           "flagged": diag.flagged}
    except (NumericsError, ConfigError) as exc:
        results["errors"]["holo"] = str(exc)
    timings["holo"] = time.time() - t0

    _emit(cfg, out_dir, timings, results)
    return results


# ---------------------------------------------------------------------------
# emission and re-emission
# ---------------------------------------------------------------------------

def _config_echo(cfg: ExperimentConfig) -> dict:
    fam = None
    if cfg.family is not None:
        fam = {k: getattr(cfg.family, k)
               for k in ("kind", "q", "r0", "delta0", "R0",
                         "transition_width", "neck", "neck_p",
                         "neck_length", "body", "body_scale")}
    return {
        "name": cfg.name, "seed": cfg.seed, "p": cfg.p,
        "eps_N": cfg.eps_N, "eps": cfg.eps_value,
        "resolution_mult": cfg.resolution_mult,
        "stages": list(cfg.stages), "n_max": cfg.n_max,
        "family": fam,
        "target": cfg.target.descriptor(),
        "grid": {"n_theta": cfg.grid.n_theta, "ds": cfg.grid.ds,
                 "outer": cfg.grid.outer, "s_margin": cfg.grid.s_margin},
        "neck": {"delta": cfg.neck_delta, "R": cfg.neck_R},
        "rho_sweep": list(cfg.rho_sweep),
    }


def _emit(cfg: ExperimentConfig, out_dir: str, timings: dict,
          results: dict) -> None:
    for name, table in results["tables"].items():
        write_csv(f"{out_dir}/{name}.csv", table["columns"], table["rows"])
    write_summary(f"{out_dir}/results.json", _config_echo(cfg), timings,
                  results)


def run_report(out_dir: str) -> dict:
    """Re-emit every CSV from the cached results.json (no recomputation)."""
    import json
    with open(f"{out_dir}/results.json") as fh:
        doc = json.load(fh)
    results = doc["results"]
    for name, table in results.get("tables", {}).items():
        write_csv(f"{out_dir}/{name}.csv", table["columns"], table["rows"])
    return results
