"""Experiment configuration: a strict JSON schema with fail-fast validation.

Unknown keys anywhere in the document are errors carrying the offending
path, so typos cannot silently change an experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .generators import SequenceSpec
from .targets import Sphere, make_target


def _check_keys(obj: dict, allowed: dict, path: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown config key {path}{key!r}")


_FAMILY_KEYS = {"kind", "q", "r0", "delta0", "R0", "transition_width",
                "neck", "neck_p", "neck_length", "body", "body_scale",
                "n_max"}
_TARGET_KEYS = {"kind", "ambient_dim", "radius"}
_GRID_KEYS = {"n_theta", "ds", "outer", "s_margin"}
_NECK_KEYS = {"delta", "R"}
_RHO_KEYS = {"min", "max", "count"}
_TOP_KEYS = {"name", "seed", "p", "eps_N", "eps", "resolution_mult",
             "stages", "family", "target", "grid", "neck", "rho_sweep"}

_STAGES = ("verify", "generate", "tree", "ledger", "necks", "gauge",
           "holo", "fits")


@dataclass(frozen=True)
class GridSettings:
    n_theta: int = 64
    ds: float = 0.02
    outer: float = 1.4
    s_margin: float = 5.0

    def __post_init__(self):
        if self.n_theta < 16 or (self.n_theta & (self.n_theta - 1)):
            raise ConfigError("grid.n_theta must be a power of two >= 16")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    p: float = 1.2
    eps_N: float = 0.3
    eps: float | None = None
    resolution_mult: int = 1
    stages: tuple = ("generate", "tree", "ledger", "necks")
    family: SequenceSpec | None = None
    n_max: int = 6
    target: Sphere = field(default_factory=Sphere)
    grid: GridSettings = field(default_factory=GridSettings)
    neck_delta: float = 0.25
    neck_R: float = 4.0
    rho_sweep: tuple = (0.05, 0.2, 5)

    def __post_init__(self):
        if not (1.0 < self.p < 2.0):
            raise ConfigError(f"p must lie in (1, 2), got {self.p}")
        if self.eps is not None and not (0 < self.eps < self.eps_N):
            raise ConfigError("need 0 < eps < eps_N")
        if self.resolution_mult < 1:
            raise ConfigError("resolution_mult must be >= 1")
        for st in self.stages:
            if st not in _STAGES:
                raise ConfigError(f"unknown stage {st!r}")

    @property
    def eps_value(self) -> float:
        return self.eps if self.eps is not None else self.eps_N / 4.0


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a parsed JSON document into an ExperimentConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _check_keys(doc, {k: None for k in _TOP_KEYS}, "")

    target = Sphere()
    if "target" in doc:
        _check_keys(doc["target"], {k: None for k in _TARGET_KEYS},
                    "target.")
        target = make_target(doc["target"])
        if not isinstance(target, Sphere):
            raise ConfigError("only sphere targets are configurable")

    family = None
    n_max = int(doc.get("family", {}).get("n_max", 6)) if "family" in doc \
        else 6
    if "family" in doc:
        fam = dict(doc["family"])
        _check_keys(fam, {k: None for k in _FAMILY_KEYS}, "family.")
        fam.pop("n_max", None)
        try:
            family = SequenceSpec(target=target, **fam)
        except TypeError as exc:
            raise ConfigError(f"family: {exc}") from exc

    grid = GridSettings()
    if "grid" in doc:
        _check_keys(doc["grid"], {k: None for k in _GRID_KEYS}, "grid.")
        grid = GridSettings(**doc["grid"])

    neck_delta, neck_R = 0.25, 4.0
    if "neck" in doc:
        _check_keys(doc["neck"], {k: None for k in _NECK_KEYS}, "neck.")
        neck_delta = float(doc["neck"].get("delta", 0.25))
        neck_R = float(doc["neck"].get("R", 4.0))

    rho = (0.05, 0.2, 5)
    if "rho_sweep" in doc:
        _check_keys(doc["rho_sweep"], {k: None for k in _RHO_KEYS},
                    "rho_sweep.")
        rho = (float(doc["rho_sweep"].get("min", 0.05)),
               float(doc["rho_sweep"].get("max", 0.2)),
               int(doc["rho_sweep"].get("count", 5)))

    return ExperimentConfig(
        name=str(doc.get("name", "experiment")),
        seed=int(doc.get("seed", 0)),
        p=float(doc.get("p", 1.2)),
        eps_N=float(doc.get("eps_N", 0.3)),
        eps=float(doc["eps"]) if "eps" in doc else None,
        resolution_mult=int(doc.get("resolution_mult", 1)),
        stages=tuple(doc.get("stages", ("generate", "tree", "ledger",
                                        "necks"))),
        family=family,
        n_max=n_max,
        target=target,
        grid=grid,
        neck_delta=neck_delta,
        neck_R=neck_R,
        rho_sweep=rho,
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)


def rho_values(cfg: ExperimentConfig) -> np.ndarray:
    lo, hi, count = cfg.rho_sweep
    return np.geomspace(lo, hi, count)
