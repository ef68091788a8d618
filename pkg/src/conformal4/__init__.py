"""Conformal deformation numerics on 4-manifolds: sigma_2 cone algebra, a
continuity-method solver for sigma_2^(1/2)(A^t) = f exp(2u) on S^1 x S^3,
Paneitz operator spectra and the conformal invariant ledger."""

from .cone_algebra import ConeVerdict, cone_check, sigma1, sigma2
from .continuity_solver import SolveConfig, continue_path, ricci_verdict
from .model_geometry import (
    ConstantsOnly,
    CurvaturePackage,
    ProductSurfaces,
    ReducedField,
    RoundS4,
    S1xS3,
    curvature_of,
)

__version__ = "0.1.0"
