"""bubblelab: a numerical laboratory for bubbling analysis of approximate
harmonic maps from planar domains into embedded targets.

Core building blocks:

  * targets    - embedded manifolds N in R^k (projector, second fundamental
                 form, retraction; closed forms for round spheres)
  * grid       - log-polar grids, regions, exact-area quadrature
  * fields     - maps/complex fields, spectral-FD calculus, tension field,
                 Hopf differential, energy, oscillation, rescaling
  * norms      - L^p, Lorentz L^{2,1} / L^{2,inf}, L ln+ L
  * cauchy     - FFT Cauchy transform with exact cell-integrated kernel
  * generators - harmonic spheres, geodesic necks, glued families
  * gauge      - Coulomb frames, the contraction fixed point B, and the
                 decomposition A = B (G1 + G2)
  * holo       - Laurent analysis and holomorphic approximation of the
                 Hopf differential
  * bubbletree - concentration function, bubble extraction, energy ledger,
                 neck metrics, decay fits
  * cli        - experiment runner emitting deterministic CSV/JSON reports
"""

from .bubbletree import (BubbleTree, concentration_function, decay_fit,
                         energy_ledger, extract_bubbles, neck_metrics)
from .cauchy import cauchy_transform
from .fields import (ComplexField, MapField, differentiate, energy,
                     extend_field, hopf, oscillation, rescale, tension)
from .gauge import coulomb_gauge, decompose, initial_frame, solve_B
from .generators import (BumpSpec, SequenceSpec, geodesic_neck,
                         glue_sequence, harmonic_sphere, perturb)
from .grid import LogPolarGrid, Region, annulus, disk, make_grid
from .holo import (laurent_coefficients, mollify_project, monomial_norm,
                   neck_diagnostics, project_annulus)
from .norms import norm
from .targets import Sphere, Target

__version__ = "0.1.0"

__all__ = [
    "BubbleTree", "BumpSpec", "ComplexField", "LogPolarGrid", "MapField",
    "Region", "SequenceSpec", "Sphere", "Target", "annulus",
    "cauchy_transform", "concentration_function", "coulomb_gauge",
    "decay_fit", "decompose", "differentiate", "disk", "energy",
    "energy_ledger", "extend_field", "extract_bubbles", "geodesic_neck",
    "glue_sequence", "harmonic_sphere", "hopf", "initial_frame",
    "laurent_coefficients", "make_grid", "mollify_project",
    "monomial_norm", "neck_diagnostics", "neck_metrics", "norm",
    "oscillation", "perturb", "project_annulus", "rescale", "solve_B",
    "tension",
]
