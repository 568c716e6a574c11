"""qcurv6: radial workbench for (-Delta)^3 u = V e^{6u} in R^6.

Submodules
----------
constants   dimensional constants (gamma6, omega5, omega6, Lambda1)
grid        radial grids, sampled fields, Gauss-Legendre cells
vspec       prescribed-curvature functions and hypothesis validators
calculus    radial Laplacians, representation identities, curvature quadrature
profiles    closed-form jets (spherical, kernel, polyharmonic, synthetic)
shooting    sixth-order radial IVP integration, events, shooting
kernel      spherical means of the logarithmic kernel
entire      fixed-point construction of entire solutions, Pohozaev residual
blowup      blow-up diagnostics: rescaling, beta fits, quantization, necks
linearized  the linearized equation around the spherical profile
families    analytic example families
cli         command-line entry point
"""

from .constants import CONSTANTS, DELTA_STAR, GAMMA6, LAMBDA1, OMEGA5, OMEGA6
from .grid import GaussCells, RadialField, RadialGrid
from .vspec import VSpec, gauge_transform

__all__ = [
    "CONSTANTS", "DELTA_STAR", "GAMMA6", "LAMBDA1", "OMEGA5", "OMEGA6",
    "GaussCells", "RadialField", "RadialGrid", "VSpec", "gauge_transform",
]
