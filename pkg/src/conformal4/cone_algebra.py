"""Elementary symmetric functions of symmetric 4x4 endomorphisms.

All functions accept a single ``(4, 4)`` array or a stack ``(..., 4, 4)`` and
broadcast over the leading axes. Matrices are expressed in an orthonormal
frame, so an endomorphism and its bilinear form share entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolation

DIM = 4
JACOBI_TOL = 1e-12
_IDENTITY = np.eye(DIM)


def sym_endo4(entries, *, atol: float = 1e-12) -> np.ndarray:
    """Validate and return ``entries`` as a float array of symmetric 4x4 matrices."""
    a = np.asarray(entries, dtype=float)
    if a.shape[-2:] != (DIM, DIM):
        raise ValueError(f"expected trailing shape (4, 4), got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if not np.allclose(a, np.swapaxes(a, -1, -2), rtol=0.0, atol=atol * scale):
        raise ValueError("endomorphism is not symmetric")
    return a


def diag4(*values) -> np.ndarray:
    if len(values) == 1:
        values = values[0]
    return np.diag(np.asarray(values, dtype=float))


def _eye_like(a: np.ndarray) -> np.ndarray:
    return np.broadcast_to(_IDENTITY, a.shape)


def sigma1(a) -> np.ndarray | float:
    return np.trace(np.asarray(a, dtype=float), axis1=-2, axis2=-1)


def sigma2(a) -> np.ndarray | float:
    """Sum of pairwise eigenvalue products, computed as (tr(A)^2 - tr(A^2)) / 2."""
    a = np.asarray(a, dtype=float)
    s1 = np.trace(a, axis1=-2, axis2=-1)
    tr_sq = np.einsum("...ij,...ji->...", a, a)
    return 0.5 * (s1 * s1 - tr_sq)


def sigma2_from_eigenvalues(lam) -> np.ndarray | float:
    """Explicit pair sum over the last axis; used as an independent check."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    total = np.zeros(lam.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            total = total + lam[..., i] * lam[..., j]
    return total


# -- eigenvalues -------------------------------------------------------------


def _jacobi_single(a: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    a = a.copy()
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(DIM) for q in range(p + 1, DIM)))
        if off <= tol * scale:
            break
        for p in range(DIM - 1):
            for q in range(p + 1, DIM):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(DIM)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def eigenvalues(a, tol: float = JACOBI_TOL, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues in nondecreasing order by cyclic Jacobi rotation.

    Iterates until the off-diagonal Frobenius norm falls below
    ``tol * max(1, max|a_ij|)``.
    """
    a = sym_endo4(a)
    flat = a.reshape(-1, DIM, DIM)
    out = np.array([_jacobi_single(m, tol, max_sweeps) for m in flat])
    return out.reshape(a.shape[:-1])


def min_eigenvalue(a) -> np.ndarray | float:
    return eigenvalues(a)[..., 0]


# -- cone membership ---------------------------------------------------------


@dataclass(frozen=True)
class ConeVerdict:
    sigma1: float
    sigma2: float
    in_gamma2_plus: bool
    margin: float


def cone_check(a) -> ConeVerdict:
    """Strict membership test for {sigma1 > 0} and {sigma2 > 0}; margin = min of the two."""
    s1 = float(sigma1(sym_endo4(a)))
    s2 = float(sigma2(a))
    return ConeVerdict(s1, s2, bool(s1 > 0.0 and s2 > 0.0), min(s1, s2))


def in_cone(a) -> np.ndarray:
    """Vectorised membership mask for a stack of matrices."""
    return (sigma1(a) > 0.0) & (sigma2(a) > 0.0)


def require_cone(a, what: str = "endomorphism") -> None:
    mask = np.atleast_1d(in_cone(a))
    if not mask.all():
        bad = int(np.flatnonzero(~mask)[0])
        raise ConeViolation(f"{what} is outside Gamma_2^+ (first offending index {bad})", index=bad)


# -- transforms --------------------------------------------------------------


def newton_transform(a) -> np.ndarray:
    """T1(A) = sigma1(A) I - A."""
    a = np.asarray(a, dtype=float)
    return sigma1(a)[..., None, None] * _eye_like(a) - a


def l_operator(a, t: float) -> np.ndarray:
    """L^t(A) = T1(A) + (1 - t)/2 * sigma1(T1(A)) I, the elliptic coefficient of the linearization."""
    t1 = newton_transform(a)
    return t1 + (0.5 * (1.0 - t) * sigma1(t1))[..., None, None] * _eye_like(t1)


def trace_free(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a - (sigma1(a) / DIM)[..., None, None] * _eye_like(a)


def hat_reflection(a) -> np.ndarray:
    """Keep the pure-trace part of A and flip the sign of its trace-free part."""
    a = np.asarray(a, dtype=float)
    return a - 2.0 * trace_free(a)


def t_shift(a1, t: float) -> np.ndarray:
    """A^t from the Schouten tensor A^1: A^1 + (1 - t)/2 * sigma1(A^1) I."""
    a1 = np.asarray(a1, dtype=float)
    return a1 + (0.5 * (1.0 - t) * sigma1(a1))[..., None, None] * _eye_like(a1)


def shift_identity_rhs(a1, t: float):
    """sigma2(A^1) + 3/2 (1 - t)(2 - t) sigma1(A^1)^2, the closed form of sigma2(A^t)."""
    return sigma2(a1) + 1.5 * (1.0 - t) * (2.0 - t) * sigma1(a1) ** 2


def pinching_tensors(a) -> tuple[np.ndarray, np.ndarray]:
    """The two tensors that are positive definite whenever A lies in Gamma_2^+.

    Returns ``(-A + sigma1(A) I, A + sigma1(A)/2 I)``; the second equals
    T1 of the hat reflection.
    """
    a = np.asarray(a, dtype=float)
    s1 = sigma1(a)[..., None, None] * _eye_like(a)
    return s1 - a, a + 0.5 * s1


def concavity_gap(a, b, s: float) -> float:
    """Garding concavity slack of sigma2^(1/2) along the segment from A to B.

    Only defined for A, B in Gamma_2^+ and s in [0, 1]; the result is
    nonnegative up to rounding there.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    a = sym_endo4(a)
    b = sym_endo4(b)
    for name, m in (("A", a), ("B", b)):
        if not cone_check(m).in_gamma2_plus:
            raise ConeViolation(f"{name} is outside Gamma_2^+")
    mid = (1.0 - s) * a + s * b
    s2_mid = max(float(sigma2(mid)), 0.0)
    return math.sqrt(s2_mid) - (1.0 - s) * math.sqrt(sigma2(a)) - s * math.sqrt(sigma2(b))


# -- random sampling (property suites) ---------------------------------------


def random_orthogonal(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    n = 1 if size is None else size
    z = rng.standard_normal((n, DIM, DIM))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
    return q[0] if size is None else q


def random_cone_eigenvalues(rng: np.random.Generator, size: int) -> np.ndarray:
    """Rejection-sample eigenvalue quadruples inside Gamma_2^+ (some with negative entries)."""
    out = np.empty((0, DIM))
    while len(out) < size:
        lam = rng.normal(loc=0.6, scale=1.0, size=(2 * size, DIM))
        keep = (lam.sum(axis=1) > 0) & (sigma2_from_eigenvalues(lam) > 0)
        out = np.vstack([out, lam[keep]])
    return out[:size]


def random_cone_matrices(rng: np.random.Generator, size: int) -> np.ndarray:
    lam = random_cone_eigenvalues(rng, size)
    q = random_orthogonal(rng, size)
    a = q @ (lam[:, :, None] * np.swapaxes(q, -1, -2))
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def random_symmetric(rng: np.random.Generator, size: int) -> np.ndarray:
    z = rng.standard_normal((size, DIM, DIM))
    return 0.5 * (z + np.swapaxes(z, -1, -2))
