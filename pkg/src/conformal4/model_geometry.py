"""Closed-form curvature of the model 4-manifolds and the conformal laws
restricted to S^1-symmetric conformal factors on S^1 x S^3.

Conventions: the Laplacian is the trace of the Hessian (nonpositive
spectrum), ``|W|^2`` is one quarter of the full tensor norm
``sum W_ijkl^2`` (the normalization under which
``8 pi^2 chi = int |W|^2 + F_2``), and a conformal metric is written
``g~ = exp(-2u) g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from . import cone_algebra as ca
from .errors import ConfigurationError, UnsupportedBackground

SPHERE3_VOLUME = 2.0 * math.pi**2
CGB_REL_TOL = 1e-9


# -- backgrounds ---------------------------------------------------------------


def _require_positive(**params):
    for name, value in params.items():
        if not (value > 0.0 and math.isfinite(value)):
            raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class RoundS4:
    radius: float = 1.0

    def __post_init__(self):
        _require_positive(radius=self.radius)


@dataclass(frozen=True)
class S1xS3:
    circumference: float = 2.0 * math.pi
    sphere_radius: float = 1.0

    def __post_init__(self):
        _require_positive(circumference=self.circumference, sphere_radius=self.sphere_radius)


def _surface_euler(kappa: float, area: float) -> int:
    """Euler characteristic forced by Gauss-Bonnet, kappa * area = 2 pi chi."""
    if kappa == 0.0:
        return 0
    chi = kappa * area / (2.0 * math.pi)
    nearest = round(chi)
    if abs(chi - nearest) > 1e-9 * max(1.0, abs(chi)) or nearest % 2 or nearest > 2:
        raise ConfigurationError(
            f"area {area} is not Gauss-Bonnet consistent with curvature {kappa} "
            f"(kappa * area / 2pi = {chi:.12g} is not an even integer <= 2)"
        )
    return int(nearest)


@dataclass(frozen=True)
class ProductSurfaces:
    """Product of two closed surfaces of constant Gauss curvature."""

    kappa1: float
    kappa2: float
    area1: float
    area2: float

    def __post_init__(self):
        _require_positive(area1=self.area1, area2=self.area2)
        _surface_euler(self.kappa1, self.area1)
        _surface_euler(self.kappa2, self.area2)

    @property
    def euler_factors(self) -> tuple[int, int]:
        return _surface_euler(self.kappa1, self.area1), _surface_euler(self.kappa2, self.area2)


def cgb_residual(chi: float, weyl_l2: float, f2: float) -> float:
    """|8 pi^2 chi - (int|W|^2 + F_2)| / 8 pi^2."""
    return abs(8.0 * math.pi**2 * chi - (weyl_l2 + f2)) / (8.0 * math.pi**2)


@dataclass(frozen=True)
class ConstantsOnly:
    """A manifold known only through (chi, int|W|^2, Y, int Q)."""

    name: str
    chi: int
    weyl_l2: float
    yamabe: float
    q_total: float

    def __post_init__(self):
        if self.weyl_l2 < 0.0:
            raise ConfigurationError(f"{self.name}: weyl_l2 must be nonnegative")
        scale = max(1.0, abs(8.0 * math.pi**2 * self.chi), self.weyl_l2, abs(2.0 * self.q_total))
        gap = abs(8.0 * math.pi**2 * self.chi - self.weyl_l2 - 2.0 * self.q_total)
        if gap > CGB_REL_TOL * scale:
            raise ConfigurationError(
                f"{self.name}: 8 pi^2 chi != int|W|^2 + 2 int Q (gap {gap:.3e})"
            )


Background = Union[RoundS4, S1xS3, ProductSurfaces, ConstantsOnly]


# -- curvature packages ----------------------------------------------------------


@dataclass(frozen=True)
class CurvaturePackage:
    ric: np.ndarray
    scalar: float
    schouten1: np.ndarray
    volume: float
    weyl_l2: float
    euler: int
    homogeneous: bool = True


def riemann_product_surfaces(kappa1: float, kappa2: float) -> np.ndarray:
    """R_ijkl in an adapted orthonormal frame, sectional curvature K(e_i, e_j) = R_ijji."""
    rm = np.zeros((4, 4, 4, 4))
    for a, b, k in ((0, 1, kappa1), (2, 3, kappa2)):
        rm[a, b, b, a] = rm[b, a, a, b] = k
        rm[a, b, a, b] = rm[b, a, b, a] = -k
    return rm


def kulkarni_nomizu_with_metric(h: np.ndarray) -> np.ndarray:
    g = np.eye(4)
    return (
        np.einsum("il,jk->ijkl", h, g)
        + np.einsum("jk,il->ijkl", h, g)
        - np.einsum("ik,jl->ijkl", h, g)
        - np.einsum("jl,ik->ijkl", h, g)
    )


def weyl_density(rm: np.ndarray) -> float:
    """Pointwise |W|^2 by subtracting the Schouten part from the full curvature tensor."""
    ric = np.einsum("ijjk->ik", rm)
    scalar = np.trace(ric)
    schouten = 0.5 * (ric - scalar / 6.0 * np.eye(4))
    weyl = rm - kulkarni_nomizu_with_metric(schouten)
    return 0.25 * float(np.sum(weyl**2))


def _package(ric: np.ndarray, volume: float, weyl_l2: float, euler: int) -> CurvaturePackage:
    scalar = float(np.trace(ric))
    return CurvaturePackage(
        ric=ric,
        scalar=scalar,
        schouten1=0.5 * (ric - scalar / 6.0 * np.eye(4)),
        volume=volume,
        weyl_l2=weyl_l2,
        euler=euler,
    )


def curvature_of(bg: Background) -> CurvaturePackage:
    if isinstance(bg, RoundS4):
        r = bg.radius
        return _package(3.0 / r**2 * np.eye(4), 8.0 * math.pi**2 / 3.0 * r**4, 0.0, 2)
    if isinstance(bg, S1xS3):
        r = bg.sphere_radius
        ric = ca.diag4(0.0, 2.0 / r**2, 2.0 / r**2, 2.0 / r**2)
        return _package(ric, bg.circumference * SPHERE3_VOLUME * r**3, 0.0, 0)
    if isinstance(bg, ProductSurfaces):
        k1, k2 = bg.kappa1, bg.kappa2
        ric = np.einsum("ijjk->ik", riemann_product_surfaces(k1, k2))
        volume = bg.area1 * bg.area2
        chi1, chi2 = bg.euler_factors
        weyl_l2 = weyl_density(riemann_product_surfaces(k1, k2)) * volume
        return _package(ric, volume, weyl_l2, chi1 * chi2)
    if isinstance(bg, ConstantsOnly):
        raise UnsupportedBackground(f"{bg.name} carries no frame-level curvature")
    raise UnsupportedBackground(f"unknown background {bg!r}")


def schouten_t(pkg: CurvaturePackage, t: float) -> np.ndarray:
    """A^t = (Ric - t R / 6 g) / 2."""
    return 0.5 * (pkg.ric - t * pkg.scalar / 6.0 * np.eye(4))


def ricci_from_schouten(a1) -> tuple[np.ndarray, np.ndarray | float]:
    """Invert A^1 = (Ric - R/6 g)/2: returns (Ric, R) with R = 6 sigma1(A^1)."""
    a1 = np.asarray(a1, dtype=float)
    s1 = ca.sigma1(a1)
    ric = 2.0 * a1 + s1[..., None, None] * np.broadcast_to(np.eye(4), a1.shape)
    return ric, 6.0 * s1


def f2_density(pkg: CurvaturePackage) -> float:
    return -0.5 * float(np.sum(pkg.ric**2)) + pkg.scalar**2 / 6.0


def q_curvature_constant(pkg: CurvaturePackage) -> tuple[float, float]:
    """Pointwise Q and int Q dvol on a homogeneous background (Delta R = 0)."""
    q = 2.0 * float(ca.sigma2(pkg.schouten1))
    return q, q * pkg.volume


def paneitz_b_tensor(pkg: CurvaturePackage) -> np.ndarray:
    """B = (2/3) R g - 2 Ric, the first-order coefficient of the Paneitz operator."""
    return 2.0 / 3.0 * pkg.scalar * np.eye(4) - 2.0 * pkg.ric


# -- reduced fields on S^1 x S^3 -------------------------------------------------

SCHEMES = ("spectral", "fd4")

_FD4_STENCILS = {
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 1),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2),
    4: (np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0, 4),
}


def _wavenumbers(n: int, period: float) -> np.ndarray:
    return 2.0 * math.pi / period * np.fft.fftfreq(n, d=1.0 / n)


def _spectral_symbol(n: int, period: float, order: int) -> np.ndarray:
    k = _wavenumbers(n, period)
    symbol = (1j * k) ** order
    if order % 2 == 1:
        # the Nyquist mode has no real odd derivative
        symbol[n // 2] = 0.0
    return symbol


@lru_cache(maxsize=64)
def _diff_matrix_cached(n: int, period: float, order: int, scheme: str) -> np.ndarray:
    if scheme == "spectral":
        symbol = _spectral_symbol(n, period, order)
        mat = np.real(np.fft.ifft(symbol[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))
    elif scheme == "fd4":
        if order == 3:
            return _diff_matrix_cached(n, period, 1, scheme) @ _diff_matrix_cached(n, period, 2, scheme)
        stencil, power = _FD4_STENCILS[order]
        h = period / n
        half = len(stencil) // 2
        mat = np.zeros((n, n))
        for offset, c in zip(range(-half, half + 1), stencil):
            mat += c * np.roll(np.eye(n), offset, axis=1)
        mat /= h**power
    else:
        raise ConfigurationError(f"unknown derivative scheme {scheme!r}")
    mat.setflags(write=False)
    return mat


def diff_matrix(n: int, period: float, order: int, scheme: str = "spectral") -> np.ndarray:
    """Dense periodic differentiation matrix of the given order (1, 2, 3 or 4)."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"unsupported derivative order {order}")
    return _diff_matrix_cached(int(n), float(period), int(order), scheme)


@dataclass(frozen=True)
class ReducedField:
    """Samples u(theta_k), theta_k = k L / N, of an S^1-invariant function on S^1 x S^3."""

    samples: np.ndarray
    period: float = 2.0 * math.pi
    scheme: str = "spectral"

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1:
            raise ConfigurationError("samples must be one-dimensional")
        n = len(s)
        if n < 16 or n % 2:
            raise ConfigurationError(f"grid size must be even and >= 16, got {n}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown derivative scheme {self.scheme!r}")
        _require_positive(period=self.period)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def grid_n(self) -> int:
        return len(self.samples)

    @property
    def theta(self) -> np.ndarray:
        return grid(self.grid_n, self.period)

    @classmethod
    def from_function(cls, fn, n: int, period: float = 2.0 * math.pi, scheme: str = "spectral"):
        return cls(fn(grid(n, period)), period, scheme)

    @classmethod
    def constant(cls, value: float, n: int, period: float = 2.0 * math.pi, scheme: str = "spectral"):
        return cls(np.full(n, float(value)), period, scheme)

    def with_samples(self, samples) -> "ReducedField":
        return ReducedField(samples, self.period, self.scheme)

    def derivative(self, order: int = 1) -> np.ndarray:
        if self.scheme == "spectral":
            symbol = _spectral_symbol(self.grid_n, self.period, order)
            return np.real(np.fft.ifft(symbol * np.fft.fft(self.samples)))
        return diff_matrix(self.grid_n, self.period, order, self.scheme) @ self.samples

    def matrix(self, order: int) -> np.ndarray:
        return diff_matrix(self.grid_n, self.period, order, self.scheme)

    def derive(self, values, order: int = 1) -> np.ndarray:
        """Differentiate another array living on this field's grid with the same scheme."""
        return self.with_samples(values).derivative(order)

    def integrate(self, values, sphere_radius: float = 1.0) -> float:
        """int h dvol over S^1 x S^3 for an S^1-invariant h sampled on the grid."""
        h = self.period / self.grid_n
        return float(np.sum(values)) * h * SPHERE3_VOLUME * sphere_radius**3


def grid(n: int, period: float) -> np.ndarray:
    return np.arange(n) * (period / n)


@dataclass(frozen=True)
class ReducedEndoField:
    """Eigenvalues of g^-1 A along d/dtheta and (multiplicity three) along S^3."""

    lambda_theta: np.ndarray
    lambda_sphere: np.ndarray

    def __post_init__(self):
        if np.shape(self.lambda_theta) != np.shape(self.lambda_sphere):
            raise ConfigurationError("eigenvalue arrays must have equal length")

    @property
    def sigma1(self) -> np.ndarray:
        return self.lambda_theta + 3.0 * self.lambda_sphere

    @property
    def sigma2(self) -> np.ndarray:
        return 3.0 * self.lambda_theta * self.lambda_sphere + 3.0 * self.lambda_sphere**2

    def matrices(self) -> np.ndarray:
        """Stack of diagonal (N, 4, 4) endomorphisms in the adapted frame."""
        n = len(self.lambda_theta)
        out = np.zeros((n, 4, 4))
        out[:, 0, 0] = self.lambda_theta
        for i in (1, 2, 3):
            out[:, i, i] = self.lambda_sphere
        return out

    def scaled(self, factor) -> "ReducedEndoField":
        return ReducedEndoField(self.lambda_theta * factor, self.lambda_sphere * factor)


def check_reduced_setting(bg: S1xS3, u: ReducedField) -> None:
    if not isinstance(bg, S1xS3):
        raise UnsupportedBackground("reduced formulas are only available on S1xS3")
    if not math.isclose(bg.sphere_radius, 1.0, rel_tol=0.0, abs_tol=1e-14):
        raise ConfigurationError("reduced formulas assume unit sphere radius; rescale the metric first")
    if not math.isclose(bg.circumference, u.period, rel_tol=1e-12):
        raise ConfigurationError(
            f"field period {u.period} does not match circumference {bg.circumference}"
        )


def conformal_schouten_reduced(bg: S1xS3, u: ReducedField, t: float) -> ReducedEndoField:
    """Eigenvalues of g^-1 A^t_u for u = u(theta) on unit S^1 x S^3.

    A^t_u = A^t_g + Hess u + (1-t)/2 (Delta u) g + du (x) du - (2-t)/2 |du|^2 g
    with Hess u = u'' dtheta^2, Delta u = u'', |du|^2 = u'^2.
    """
    check_reduced_setting(bg, u)
    d1 = u.derivative(1)
    d2 = u.derivative(2)
    lam_theta = -0.5 * t + 0.5 * (3.0 - t) * d2 + 0.5 * t * d1**2
    lam_sphere = 0.5 * (2.0 - t) + 0.5 * (1.0 - t) * d2 - 0.5 * (2.0 - t) * d1**2
    return ReducedEndoField(lam_theta, lam_sphere)


def q_curvature_reduced(bg: S1xS3, u: ReducedField) -> np.ndarray:
    """Q of g~ = exp(-2u) g at the grid points."""
    a1 = conformal_schouten_reduced(bg, u, 1.0)
    e2u = np.exp(2.0 * u.samples)
    scalar_new = 6.0 * e2u * a1.sigma1
    d1u = u.derivative(1)
    lap_new = e2u * (u.derive(scalar_new, 2) - 2.0 * d1u * u.derive(scalar_new, 1))
    return -lap_new / 12.0 + 2.0 * e2u**2 * a1.sigma2


def q_transform_residual(bg: S1xS3, u: ReducedField) -> float:
    """sup over the grid of |-P u + 2 Q_g - 2 Q_g~ exp(-4u)|."""
    from .paneitz_spectral import paneitz_apply_reduced

    check_reduced_setting(bg, u)
    q_background, _ = q_curvature_constant(curvature_of(bg))
    q_new = q_curvature_reduced(bg, u)
    lhs = -paneitz_apply_reduced(bg, u) + 2.0 * q_background
    return float(np.max(np.abs(lhs - 2.0 * q_new * np.exp(-4.0 * u.samples))))
