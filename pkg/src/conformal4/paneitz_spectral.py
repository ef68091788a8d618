"""Paneitz operator P = Delta^2 + delta((2/3) R g - 2 Ric) d on the model manifolds.

Sign conventions: Delta is the trace of the Hessian, delta is the L^2
adjoint of d, so delta d = -Delta on functions. Laplace eigenvalue lists use
lambda >= 0 with Delta psi = -lambda psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cone_algebra as ca
from .errors import ConfigurationError, UnsupportedBackground
from .model_geometry import (
    ConstantsOnly,
    ProductSurfaces,
    ReducedField,
    RoundS4,
    S1xS3,
    check_reduced_setting,
    curvature_of,
    paneitz_b_tensor,
    q_curvature_constant,
)


def paneitz_apply_reduced(bg: S1xS3, phi: ReducedField) -> np.ndarray:
    """P phi = phi'''' - B_thth phi'' for phi = phi(theta) on unit S^1 x S^3 (B_thth = 4)."""
    check_reduced_setting(bg, phi)
    b = paneitz_b_tensor(curvature_of(bg))
    return phi.derivative(4) - b[0, 0] * phi.derivative(2)


def reduced_symbol(k, period: float = 2.0 * math.pi) -> np.ndarray:
    """Fourier symbol of the reduced operator on modes exp(i k 2 pi theta / L)."""
    w = 2.0 * math.pi / period * np.asarray(k, dtype=float)
    return w**4 + 4.0 * w**2


# -- quadratic form ---------------------------------------------------------------


@dataclass(frozen=True)
class ProductMode:
    """phi = psi1(x) psi2(y) on a surface product, each factor L^2-normalized.

    ``lam``/``mu`` are the Laplace eigenvalues of the factors (Delta psi = -lambda psi).
    """

    lam: float
    mu: float

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ConfigurationError("Laplace eigenvalues must be nonnegative")


@dataclass(frozen=True)
class QuadraticFormReport:
    form_value: float
    hessian_term: float
    curvature_term: float
    decomposition_residual: float
    l2_norm_sq: float


def _report(form_value, hessian_term, curvature_term, l2):
    return QuadraticFormReport(
        float(form_value),
        float(hessian_term),
        float(curvature_term),
        abs(float(form_value) - float(hessian_term) - float(curvature_term)),
        float(l2),
    )


def quadratic_form(bg, phi) -> QuadraticFormReport:
    """<P phi, phi> and its Bochner split (4/3) int |trace-free Hess|^2 + (2/3) int (R g - Ric)(grad, grad).

    ``form_value`` is computed as the L^2 pairing of the assembled operator with
    phi; the split is computed from pointwise Hessian and gradient data, so the
    residual measures the integration by parts at the quadrature's accuracy.
    Supports reduced fields on S1xS3 and separable modes on ProductSurfaces.
    """
    if isinstance(bg, S1xS3) and isinstance(phi, ReducedField):
        pkg = curvature_of(bg)
        form_value = phi.integrate(paneitz_apply_reduced(bg, phi) * phi.samples)
        d1 = phi.derivative(1)
        d2 = phi.derivative(2)
        # Hess phi = phi'' dth^2, trace-free part has squared norm (3/4) phi''^2
        hess_tf_sq = 0.75 * d2**2
        rg_minus_ric = pkg.scalar - pkg.ric[0, 0]
        hessian_term = 4.0 / 3.0 * phi.integrate(hess_tf_sq)
        curvature_term = 2.0 / 3.0 * phi.integrate(rg_minus_ric * d1**2)
        return _report(form_value, hessian_term, curvature_term, phi.integrate(phi.samples**2))
    if isinstance(bg, ProductSurfaces) and isinstance(phi, ProductMode):
        k1, k2 = bg.kappa1, bg.kappa2
        lam, mu = phi.lam, phi.mu
        scalar = 2.0 * k1 + 2.0 * k2
        form_value = product_paneitz_eigenvalue(lam, mu, k1, k2)
        # per-factor Bochner: int |Hess psi|^2 = lambda^2 - kappa lambda; cross terms give 2 lambda mu
        hess_sq = (lam**2 - k1 * lam) + (mu**2 - k2 * mu) + 2.0 * lam * mu
        hessian_term = 4.0 / 3.0 * (hess_sq - 0.25 * (lam + mu) ** 2)
        curvature_term = 2.0 / 3.0 * ((scalar - k1) * lam + (scalar - k2) * mu)
        return _report(form_value, hessian_term, curvature_term, 1.0)
    if isinstance(bg, ConstantsOnly):
        raise UnsupportedBackground(f"{bg.name} carries no frame-level curvature")
    raise UnsupportedBackground(
        f"quadratic form not available for {type(bg).__name__} with {type(phi).__name__}"
    )


# -- product spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class ProductSpectrumInput:
    kappa1: float
    kappa2: float
    eigs1: tuple
    eigs2: tuple

    def __post_init__(self):
        for name in ("eigs1", "eigs2"):
            eigs = np.asarray(getattr(self, name), dtype=float)
            if eigs.ndim != 1 or eigs.size == 0:
                raise ConfigurationError(f"{name} must be a nonempty list")
            if np.any(eigs < 0):
                raise ConfigurationError(f"{name} contains a negative Laplace eigenvalue")
            if np.any(np.diff(eigs) < 0):
                raise ConfigurationError(f"{name} must be sorted ascending")
            if eigs[0] != 0.0:
                raise ConfigurationError(f"{name} must contain 0 (the constants)")
            object.__setattr__(self, name, tuple(float(x) for x in eigs))


def product_paneitz_eigenvalue(lam, mu, kappa1: float, kappa2: float):
    """(lam + mu)^2 + b1 lam + b2 mu with b_i = (2/3) R - 2 kappa_i."""
    scalar = 2.0 * kappa1 + 2.0 * kappa2
    b1 = 2.0 / 3.0 * scalar - 2.0 * kappa1
    b2 = 2.0 / 3.0 * scalar - 2.0 * kappa2
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return (lam + mu) ** 2 + b1 * lam + b2 * mu


def product_spectrum_table(inp: ProductSpectrumInput) -> np.ndarray:
    """Rows (lambda, mu, eigenvalue) over all pairs, sorted by eigenvalue then (lambda, mu)."""
    lam, mu = np.meshgrid(np.array(inp.eigs1), np.array(inp.eigs2), indexing="ij")
    vals = product_paneitz_eigenvalue(lam, mu, inp.kappa1, inp.kappa2)
    rows = np.column_stack([lam.ravel(), mu.ravel(), vals.ravel()])
    order = np.lexsort((rows[:, 1], rows[:, 0], rows[:, 2]))
    return rows[order]


def product_paneitz_spectrum(inp: ProductSpectrumInput) -> np.ndarray:
    return product_spectrum_table(inp)[:, 2]


# -- positivity certificate ---------------------------------------------------------


@dataclass
class Certificate:
    positive_semidefinite: bool
    kernel_is_constants: bool
    condition_holds: bool
    condition_margin: float
    ricci_factor: float
    witness: Optional[dict] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "positive_semidefinite": self.positive_semidefinite,
            "kernel_is_constants": self.kernel_is_constants,
            "condition_holds": self.condition_holds,
            "condition_margin": self.condition_margin,
            "ricci_factor": self.ricci_factor,
            "witness": self.witness,
            "detail": self.detail,
        }


def pointwise_condition_margin(pkg, ricci_factor: float = 1.0) -> float:
    """Smallest eigenvalue of R g - c Ric (c = 1 is the borderline case of the criterion)."""
    return float(ca.min_eigenvalue(pkg.scalar * np.eye(4) - ricci_factor * pkg.ric))


def positivity_certificate(
    bg,
    spectrum: ProductSpectrumInput | None = None,
    ricci_factor: float = 1.0,
    reduced_modes: int = 64,
) -> Certificate:
    """Certify P >= 0 with kernel the constants from R g - c Ric >= 0, c in [1, 3].

    The kernel claim relies on the rigidity step for the round sphere, which is
    taken as given. When the pointwise condition fails, a negative direction is
    searched for in the supplied product spectrum (ProductSurfaces) or among the
    reduced Fourier modes (S1xS3); the witness is reported if found.
    """
    if not 1.0 <= ricci_factor <= 3.0:
        raise ConfigurationError("ricci_factor must lie in [1, 3]")
    if isinstance(bg, ConstantsOnly):
        raise UnsupportedBackground(f"{bg.name} carries no frame-level curvature")
    pkg = curvature_of(bg)
    margin = pointwise_condition_margin(pkg, ricci_factor)
    if margin >= 0.0:
        return Certificate(True, True, True, margin, ricci_factor,
                           detail=f"R g - {ricci_factor:g} Ric >= 0 pointwise")
    cert = Certificate(False, False, False, margin, ricci_factor,
                       detail="pointwise condition fails; searched for a negative direction")
    if isinstance(bg, ProductSurfaces) and spectrum is not None:
        if (spectrum.kappa1, spectrum.kappa2) != (bg.kappa1, bg.kappa2):
            raise ConfigurationError("spectrum curvatures do not match the background")
        table = product_spectrum_table(spectrum)
        lam, mu, val = table[0]
        if val < 0.0:
            report = quadratic_form(bg, ProductMode(lam, mu))
            cert.witness = {"lambda": lam, "mu": mu, "form_value": report.form_value,
                            "l2_norm_sq": report.l2_norm_sq}
            cert.detail = "negative Paneitz direction found in the product spectrum"
    elif isinstance(bg, S1xS3):
        k = np.arange(1, reduced_modes + 1)
        vals = reduced_symbol(k, bg.circumference)
        if vals.min() < 0.0:
            j = int(np.argmin(vals))
            cert.witness = {"mode": int(k[j]), "form_value": float(vals[j])}
    return cert


# -- Chang-Yang functional --------------------------------------------------------------


def evaluate_F(bg, phi) -> float:
    """<P phi, phi> - 4 int Q phi - (int Q) log int exp(-4 phi).

    ``phi`` is a ReducedField on S1xS3 or a constant (float) on any
    frame-level homogeneous background.
    """
    if isinstance(bg, ConstantsOnly):
        raise UnsupportedBackground(f"{bg.name}: evaluate_F needs pointwise Q")
    pkg = curvature_of(bg)
    q_point, q_total = q_curvature_constant(pkg)
    if isinstance(phi, ReducedField):
        check_reduced_setting(bg, phi)
        pairing = phi.integrate(paneitz_apply_reduced(bg, phi) * phi.samples)
        linear = phi.integrate(q_point * phi.samples)
        exp_integral = phi.integrate(np.exp(-4.0 * phi.samples))
    elif np.isscalar(phi):
        c = float(phi)
        pairing = 0.0
        linear = q_total * c
        exp_integral = math.exp(-4.0 * c) * pkg.volume
    else:
        raise UnsupportedBackground(f"evaluate_F does not accept {type(phi).__name__}")
    if not (exp_integral > 0.0 and math.isfinite(exp_integral)):
        raise ConfigurationError("int exp(-4 phi) dvol is not a positive finite number")
    return float(pairing - 4.0 * linear - q_total * math.log(exp_integral))
