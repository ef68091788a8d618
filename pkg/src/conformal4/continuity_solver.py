"""Continuity method for sigma2^(1/2)(g^-1 A^t_u) = f exp(2u) on S^1 x S^3.

The path starts at t = delta < 0 with u = 0 and f = sigma2^(1/2)(A^delta_g),
then marches t toward t_target, solving each equation by damped Newton
iteration on the sigma2 form F_t(u) = sigma2(A^t_u) - f^2 exp(4u).

An optional background factor w makes the data inhomogeneous: the background
metric becomes exp(-2w) g_0 and every quantity is still expressed in the
frame of the unit product metric g_0, so the path starts at u = w with
f = sigma2^(1/2)(A^delta_w) exp(-2w).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import cone_algebra as ca
from .errors import ConeViolation, ConfigurationError, NonConvergence, PathFailure, StaleState
from .model_geometry import (
    ReducedEndoField,
    ReducedField,
    S1xS3,
    check_reduced_setting,
    conformal_schouten_reduced,
    curvature_of,
    ricci_from_schouten,
    schouten_t,
)

log = logging.getLogger(__name__)

MAX_HALVINGS = 10


@dataclass(frozen=True)
class SolveConfig:
    delta: float = -1.0
    t_target: float = 0.0
    grid_n: int = 128
    t_step_init: float = 0.25
    t_step_min: float = 1e-6
    newton_tol: float = 1e-11
    newton_max_iter: int = 30
    cone_margin_min: float = 0.0

    def __post_init__(self):
        if not self.delta < 0.0:
            raise ConfigurationError(f"delta must be negative, got {self.delta}")
        if not self.delta < self.t_target <= 1.0:
            raise ConfigurationError(f"need delta < t_target <= 1, got {self.delta}, {self.t_target}")
        if self.newton_tol <= 0.0:
            raise ConfigurationError("newton_tol must be positive")
        if not 0.0 < self.t_step_min <= self.t_step_init:
            raise ConfigurationError("need 0 < t_step_min <= t_step_init")
        if self.newton_max_iter < 1:
            raise ConfigurationError("newton_max_iter must be at least 1")
        if self.cone_margin_min < 0.0:
            raise ConfigurationError("cone_margin_min must be nonnegative")
        if self.grid_n < 16 or self.grid_n % 2:
            raise ConfigurationError("grid_n must be even and >= 16")


@dataclass(frozen=True)
class DiagnosticsRecord:
    u_max: float
    u_min: float
    grad_max: float
    harnack_gap: float
    residual_sup: float
    t: float = float("nan")
    cone_margin: float = float("nan")
    newton_iters: int = 0


@dataclass(frozen=True)
class PathState:
    t: float
    u: ReducedField
    f_squared: np.ndarray
    cone_margin: float
    diagnostics: DiagnosticsRecord

    def __post_init__(self):
        if not self.cone_margin > 0.0:
            raise ConeViolation(f"path state at t={self.t} is not inside Gamma_2^+")


# -- data ----------------------------------------------------------------------------


def choose_f(bg: S1xS3, delta: float, n: int = 128, background_factor: ReducedField | None = None) -> np.ndarray:
    """f = sigma2^(1/2)(g^-1 A^delta_g) on the grid; constant unless a background factor is given."""
    if not delta < 0.0:
        raise ConfigurationError(f"delta must be negative so that A^delta is positive definite, got {delta}")
    if background_factor is None:
        a_delta = schouten_t(curvature_of(bg), delta)
        if not ca.min_eigenvalue(a_delta) > 0.0:
            raise ConfigurationError("A^delta_g is not positive definite")
        return np.full(n, math.sqrt(ca.sigma2(a_delta)))
    w = background_factor
    endo = conformal_schouten_reduced(bg, w, delta)
    if not (np.min(endo.lambda_theta) > 0.0 and np.min(endo.lambda_sphere) > 0.0):
        raise ConfigurationError("A^delta of the background metric is not positive definite")
    return np.sqrt(endo.sigma2) * np.exp(-2.0 * w.samples)


def _endo(bg: S1xS3, u: ReducedField, t: float) -> ReducedEndoField:
    endo = conformal_schouten_reduced(bg, u, t)
    mask = (endo.sigma1 > 0.0) & (endo.sigma2 > 0.0)
    if not mask.all():
        bad = int(np.flatnonzero(~mask)[0])
        raise ConeViolation(
            f"A^t_u leaves Gamma_2^+ at theta index {bad} (t={t})", index=bad
        )
    return endo


def cone_margin(bg: S1xS3, u: ReducedField, t: float) -> float:
    endo = conformal_schouten_reduced(bg, u, t)
    return float(min(np.min(endo.sigma1), np.min(endo.sigma2)))


def residual(state: PathState, t: float, bg: S1xS3 | None = None) -> np.ndarray:
    """sigma2^(1/2)(A^t_u) - f exp(2u) at each grid point."""
    return _residual(bg or S1xS3(state.u.period), state.u, state.f_squared, t)


def _residual(bg, u, f_squared, t) -> np.ndarray:
    endo = _endo(bg, u, t)
    return np.sqrt(endo.sigma2) - np.sqrt(f_squared) * np.exp(2.0 * u.samples)


def _sigma2_form(bg, u, f_squared, t) -> np.ndarray:
    endo = _endo(bg, u, t)
    return endo.sigma2 - f_squared * np.exp(4.0 * u.samples)


def linearization(state: PathState, t: float, bg: S1xS3 | None = None) -> np.ndarray:
    """Jacobian of u -> sigma2(A^t_u) - f^2 exp(4u) on the grid (N x N).

    Second-order coefficient: L^t(A^t_u)_thth. First-order terms come from
    contracting T1(A^t_u) with -(2-t)<du, dphi> g + 2 du (x) dphi; the
    zeroth-order coefficient is -4 f^2 exp(4u).
    """
    return _jacobian(bg or S1xS3(state.u.period), state.u, state.f_squared, t)


def linearization_coefficients(bg, u: ReducedField, f_squared, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise (second, first, zeroth) order coefficients of the linearization."""
    endo = _endo(bg, u, t)
    a = endo.matrices()
    lt = ca.l_operator(a, t)
    t1 = ca.newton_transform(a)
    d1u = u.derivative(1)
    second = lt[:, 0, 0]
    first = d1u * (2.0 * t1[:, 0, 0] - (2.0 - t) * ca.sigma1(t1))
    zeroth = -4.0 * np.asarray(f_squared, dtype=float) * np.exp(4.0 * u.samples)
    return second, first, zeroth


def _jacobian(bg, u, f_squared, t) -> np.ndarray:
    second, first, zeroth = linearization_coefficients(bg, u, f_squared, t)
    return second[:, None] * u.matrix(2) + first[:, None] * u.matrix(1) + np.diag(zeroth)


def finite_difference_jacobian(bg, u: ReducedField, f_squared, t, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the sigma2 form; independent check of the analytic one."""
    n = u.grid_n
    jac = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = eps
        plus = _sigma2_form(bg, u.with_samples(u.samples + e), f_squared, t)
        minus = _sigma2_form(bg, u.with_samples(u.samples - e), f_squared, t)
        jac[:, j] = (plus - minus) / (2.0 * eps)
    return jac


def diagnostics(bg, u: ReducedField, f_squared, t, newton_iters: int = 0) -> DiagnosticsRecord:
    res = _residual(bg, u, f_squared, t)
    u_max, u_min = float(np.max(u.samples)), float(np.min(u.samples))
    return DiagnosticsRecord(
        u_max=u_max,
        u_min=u_min,
        grad_max=float(np.max(np.abs(u.derivative(1)))),
        harnack_gap=u_max - u_min,
        residual_sup=float(np.max(np.abs(res))),
        t=float(t),
        cone_margin=cone_margin(bg, u, t),
        newton_iters=newton_iters,
    )


def make_state(bg, u: ReducedField, f_squared, t, newton_iters: int = 0) -> PathState:
    diag = diagnostics(bg, u, f_squared, t, newton_iters)
    return PathState(float(t), u, np.asarray(f_squared, dtype=float), diag.cone_margin, diag)


def initial_state(bg: S1xS3, cfg: SolveConfig, background_factor: ReducedField | None = None) -> PathState:
    check_reduced_setting(bg, ReducedField.constant(0.0, cfg.grid_n, bg.circumference))
    f = choose_f(bg, cfg.delta, cfg.grid_n, background_factor)
    if background_factor is None:
        u0 = ReducedField.constant(0.0, cfg.grid_n, bg.circumference)
    else:
        if background_factor.grid_n != cfg.grid_n:
            raise ConfigurationError("background factor grid does not match grid_n")
        u0 = background_factor
    return make_state(bg, u0, f**2, cfg.delta)


# -- Newton ---------------------------------------------------------------------------


def newton_solve(
    state: PathState, t: float, cfg: SolveConfig, bg: S1xS3 | None = None, callback=None
) -> PathState:
    """Damped Newton iteration for F_t(u) = 0 starting from ``state.u``.

    Each step is halved (at most ten times) until the iterate stays in
    Gamma_2^+ and the sup-norm of the residual does not grow. ``callback``,
    if given, receives every accepted iterate as ``callback(u, residual_sup)``.
    """
    bg = bg or S1xS3(state.u.period)
    if not state.cone_margin > cfg.cone_margin_min:
        raise ConeViolation(
            f"starting state margin {state.cone_margin:.3e} is not above {cfg.cone_margin_min:.3e}"
        )
    u = state.u
    f_sq = state.f_squared
    res_sup = float(np.max(np.abs(_residual(bg, u, f_sq, t))))
    for it in range(cfg.newton_max_iter + 1):
        if res_sup < cfg.newton_tol:
            return make_state(bg, u, f_sq, t, newton_iters=it)
        if it == cfg.newton_max_iter:
            break
        step = np.linalg.solve(_jacobian(bg, u, f_sq, t), -_sigma2_form(bg, u, f_sq, t))
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = u.with_samples(u.samples + scale * step)
            try:
                trial_sup = float(np.max(np.abs(_residual(bg, trial, f_sq, t))))
            except ConeViolation:
                trial_sup = math.inf
            if np.isfinite(trial_sup) and trial_sup <= res_sup * (1.0 + 1e-12) + 1e-15:
                break
            scale *= 0.5
        else:
            if math.isinf(trial_sup):
                raise ConeViolation(f"Newton step leaves Gamma_2^+ after {MAX_HALVINGS} halvings (t={t})")
            raise NonConvergence(f"line search stalled at t={t}", res_sup, it)
        u, res_sup = trial, trial_sup
        if callback is not None:
            callback(u, res_sup)
        log.debug("t=%.6g it=%d step=%.3g residual=%.3e", t, it, scale, res_sup)
    raise NonConvergence(
        f"Newton did not reach {cfg.newton_tol:.1e} in {cfg.newton_max_iter} iterations at t={t}",
        res_sup,
        cfg.newton_max_iter,
    )


# -- continuation -----------------------------------------------------------------------


def continue_path(
    bg: S1xS3, cfg: SolveConfig, background_factor: ReducedField | None = None
) -> tuple[PathState, list[DiagnosticsRecord]]:
    """March t from delta to t_target; returns the final state and the per-step trace.

    Step control: halve on Newton failure, double after three consecutive
    successes, clamp to [t_step_min, t_step_init]. Raises PathFailure (carrying
    the trace) once a step below t_step_min would be needed.
    """
    state = initial_state(bg, cfg, background_factor)
    trace = [state.diagnostics]
    step = cfg.t_step_init
    successes = 0
    while state.t < cfg.t_target:
        t_next = min(state.t + step, cfg.t_target)
        try:
            state = newton_solve(state, t_next, cfg, bg)
        except (NonConvergence, ConeViolation) as exc:
            log.info("step to t=%.8g failed: %s", t_next, exc)
            successes = 0
            step *= 0.5
            if step < cfg.t_step_min:
                raise PathFailure(
                    f"step fell below {cfg.t_step_min:g} at t={state.t:.10g} "
                    f"(cone margin {state.cone_margin:.3e})",
                    trace,
                    state,
                ) from exc
            continue
        trace.append(state.diagnostics)
        successes += 1
        if successes >= 3:
            step = min(2.0 * step, cfg.t_step_init)
            successes = 0
    return state, trace


# -- Ricci pinching -------------------------------------------------------------------------


@dataclass(frozen=True)
class RicciVerdict:
    lower_ok: bool
    upper_ok: bool
    margins: tuple[float, float]
    newton_form_ok: bool
    newton_form_margins: tuple[float, float]


def ricci_verdict(state: PathState, t0: float, bg: S1xS3 | None = None, tol: float = 1e-8) -> RicciVerdict:
    """Check (t0 - 1) R~ g~ < 2 Ric~ < (2 - t0) R~ g~ pointwise for g~ = exp(-2u) g.

    Also checks the equivalent pair T1(A^t0) > 0 and A^t0 + sigma1(A^t0)/2 > 0;
    margins are the smallest eigenvalue gaps over the grid.
    """
    bg = bg or S1xS3(state.u.period)
    if not math.isclose(state.t, t0, rel_tol=0.0, abs_tol=1e-12):
        raise StaleState(f"state is at t={state.t}, not t0={t0}")
    if not state.diagnostics.residual_sup < tol:
        raise StaleState(f"state residual {state.diagnostics.residual_sup:.3e} exceeds {tol:.1e}")
    u = state.u
    a_t0 = _endo(bg, u, t0).matrices()
    e2u = np.exp(2.0 * u.samples)[:, None, None]

    # curvature of g~ as g~-endomorphisms: g~^-1 = exp(2u) g^-1
    a1_new = conformal_schouten_reduced(bg, u, 1.0).matrices() * e2u
    ric_new, scalar_new = ricci_from_schouten(a1_new)
    two_ric = 2.0 * np.diagonal(ric_new, axis1=1, axis2=2)
    lower_gap = float(np.min(two_ric - (t0 - 1.0) * scalar_new[:, None]))
    upper_gap = float(np.min((2.0 - t0) * scalar_new[:, None] - two_ric))

    newton_t1, hat_t1 = ca.pinching_tensors(a_t0 * e2u)
    m1 = float(np.min(ca.eigenvalues(newton_t1)[:, 0]))
    m2 = float(np.min(ca.eigenvalues(hat_t1)[:, 0]))
    return RicciVerdict(lower_gap > 0.0, upper_gap > 0.0, (lower_gap, upper_gap), m1 > 0.0 and m2 > 0.0, (m1, m2))


# -- closed forms and a priori monitors --------------------------------------------------------


def homogeneous_sigma2(t: float) -> float:
    """sigma2(A^t_g) on unit S^1 x S^3."""
    return 1.5 * (2.0 - t) * (1.0 - t)


def homogeneous_solution(t: float, delta: float) -> float:
    """The constant solution u = log(sigma2(A^t_g) / f^2) / 4."""
    return 0.25 * math.log(homogeneous_sigma2(t) / homogeneous_sigma2(delta))


def upper_bound_monitor(bg: S1xS3, record: DiagnosticsRecord, f_squared) -> float:
    """Slack of (4/sqrt 6) f exp(2 u_max) <= sigma1(A^t_g) (from Newton's inequality at a maximum).

    Uses max f, so the check is exact for constant f and conservative otherwise.
    """
    s1 = float(ca.sigma1(schouten_t(curvature_of(bg), record.t)))
    f_max = math.sqrt(float(np.max(f_squared)))
    return s1 - 4.0 / math.sqrt(6.0) * f_max * math.exp(2.0 * record.u_max)


def lower_bound_monitor(bg: S1xS3, record: DiagnosticsRecord, f_squared, yamabe: float, f2: float = 0.0) -> float:
    """Slack of max u_t >= log(lambda_t)/4 - C with C = log(4 max f^2 Vol)/4.

    lambda_t = F_2 + (1/6)(1-t)(2-t) Y^2; the constant comes from
    C' int exp(4u) >= lambda_t / 4 with C' = max f^2.
    """
    t = record.t
    lam = f2 + (1.0 - t) * (2.0 - t) * yamabe**2 / 6.0
    if lam <= 0.0:
        return math.inf
    volume = curvature_of(bg).volume
    c = 0.25 * math.log(4.0 * float(np.max(f_squared)) * volume)
    return record.u_max - (0.25 * math.log(lam) - c)


def harnack_monitor(bg: S1xS3, record: DiagnosticsRecord) -> float:
    """Slack of max u - min u <= max|u'| * L/2 (integrate along the shorter arc)."""
    return record.grad_max * bg.circumference / 2.0 - record.harnack_gap
