"""Seeded property suites run by ``conformal4 selftest``.

Each suite returns a :class:`SuiteResult`; a suite passes when its worst
observed value satisfies the stated tolerance.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cone_algebra as ca
from . import continuity_solver as cs
from . import invariant_ledger as il
from . import model_geometry as mg
from . import paneitz_spectral as ps


@dataclass
class SuiteResult:
    name: str
    passed: bool
    tolerance: float
    worst: float
    trials: int
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst": self.worst,
            "trials": self.trials,
            "note": self.note,
        }


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


FRAME_BACKGROUNDS = (
    mg.RoundS4(1.0),
    mg.RoundS4(1.7),
    mg.S1xS3(2.0 * math.pi, 1.0),
    mg.S1xS3(3.0, 0.5),
    mg.ProductSurfaces(1.0, 1.0, 4.0 * math.pi, 4.0 * math.pi),
    mg.ProductSurfaces(-1.0, -1.0, 4.0 * math.pi, 4.0 * math.pi),
    mg.ProductSurfaces(1.0, 0.0, 4.0 * math.pi, 7.0),
    mg.ProductSurfaces(2.0, -1.0, 2.0 * math.pi, 8.0 * math.pi),
)


# -- cone algebra --------------------------------------------------------------------


def suite_cone_convexity(rng, trials=1000):
    a = ca.random_cone_matrices(rng, trials)
    b = ca.random_cone_matrices(rng, trials)
    s = rng.uniform(0.0, 1.0, trials)[:, None, None]
    mid = (1.0 - s) * a + s * b
    fails = int(np.sum(~ca.in_cone(mid)))
    return SuiteResult("cone_convexity", fails == 0, 0.0, float(fails), trials, "failures counted")


def suite_newton_positivity(rng, trials=1000):
    a = ca.random_cone_matrices(rng, trials)
    worst = float(np.min(ca.eigenvalues(ca.newton_transform(a))[:, 0]))
    for t in (-2.0, -1.0, 0.0, 0.5, 1.0):
        worst = min(worst, float(np.min(ca.eigenvalues(ca.l_operator(a, t))[:, 0])))
    return SuiteResult("newton_positivity", worst > 0.0, 0.0, worst, trials, "min eigenvalue of T1 and L^t")


def suite_garding_concavity(rng, trials=1000):
    a = ca.random_cone_matrices(rng, trials)
    b = ca.random_cone_matrices(rng, trials)
    s = rng.uniform(0.0, 1.0, trials)
    worst = min(ca.concavity_gap(a[i], b[i], float(s[i])) for i in range(trials))
    return SuiteResult("garding_concavity", worst >= -1e-10, -1e-10, float(worst), trials)


def suite_hat_identities(rng, trials=1000):
    a = ca.random_symmetric(rng, trials)
    h = ca.hat_reflection(a)
    worst = float(max(np.max(_rel(ca.sigma1(h), ca.sigma1(a))), np.max(_rel(ca.sigma2(h), ca.sigma2(a)))))
    return SuiteResult("hat_identities", worst <= 1e-12, 1e-12, worst, trials)


def suite_pinching_positivity(rng, trials=1000):
    a = ca.random_cone_matrices(rng, trials)
    p1, p2 = ca.pinching_tensors(a)
    worst = float(min(np.min(ca.eigenvalues(p1)[:, 0]), np.min(ca.eigenvalues(p2)[:, 0])))
    return SuiteResult("pinching_positivity", worst > 0.0, 0.0, worst, trials)


def suite_frame_invariance(rng, trials=1000):
    a = ca.random_symmetric(rng, trials)
    q = ca.random_orthogonal(rng, trials)
    b = q @ a @ np.swapaxes(q, -1, -2)
    worst = float(max(np.max(_rel(ca.sigma1(a), ca.sigma1(b))), np.max(_rel(ca.sigma2(a), ca.sigma2(b)))))
    mismatched = int(np.sum(ca.in_cone(a) != ca.in_cone(b)))
    return SuiteResult("frame_invariance", worst <= 1e-10 and mismatched == 0, 1e-10, worst, trials)


def suite_shift_identity(rng, trials=1000):
    a1 = ca.random_symmetric(rng, trials)
    ts = rng.uniform(-3.0, 1.0, trials)
    worst = 0.0
    for i in range(trials):
        lhs = ca.sigma2(ca.t_shift(a1[i], ts[i]))
        rhs = ca.shift_identity_rhs(a1[i], ts[i])
        worst = max(worst, float(_rel(lhs, rhs)))
    return SuiteResult("shift_identity", worst <= 1e-10, 1e-10, worst, trials)


# -- model geometry ----------------------------------------------------------------------


def suite_cgb(rng):
    worst = 0.0
    for bg in FRAME_BACKGROUNDS:
        pkg = mg.curvature_of(bg)
        worst = max(worst, mg.cgb_residual(pkg.euler, pkg.weyl_l2, il.f2_invariant(pkg)))
    return SuiteResult("chern_gauss_bonnet", worst < 1e-9, 1e-9, worst, len(FRAME_BACKGROUNDS))


def suite_q_integral(rng):
    worst = 0.0
    for bg in FRAME_BACKGROUNDS:
        pkg = mg.curvature_of(bg)
        _, q_total = mg.q_curvature_constant(pkg)
        worst = max(worst, float(_rel(q_total, 0.5 * il.f2_invariant(pkg))))
    return SuiteResult("q_integral_half_f2", worst < 1e-9, 1e-9, worst, len(FRAME_BACKGROUNDS))


def suite_constant_rescaling(rng, trials=20):
    worst = 0.0
    for _ in range(trials):
        c = rng.uniform(-2.0, 2.0)
        for bg in FRAME_BACKGROUNDS:
            pkg = mg.curvature_of(bg)
            # g~ = exp(-2c) g: sigma2(g~^-1 A~) = exp(4c) sigma2, dvol~ = exp(-4c) dvol
            scaled = math.exp(4.0 * c) * float(ca.sigma2(pkg.schouten1)) * math.exp(-4.0 * c) * pkg.volume
            worst = max(worst, float(_rel(scaled, float(ca.sigma2(pkg.schouten1)) * pkg.volume)))
    return SuiteResult("constant_rescaling", worst < 1e-9, 1e-9, worst, trials)


def suite_reduced_derivatives(rng, trials=20):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.choice([32, 64, 128]))
        period = float(rng.uniform(2.0, 10.0))
        kmax = n // 2 - 1
        ks = rng.integers(1, kmax + 1, size=3)
        amps = rng.normal(size=(3, 2))
        w = 2.0 * math.pi / period
        th = mg.grid(n, period)
        u = sum(a * np.cos(k * w * th) + b * np.sin(k * w * th) for (a, b), k in zip(amps, ks))
        exact = {
            1: sum(w * k * (-a * np.sin(k * w * th) + b * np.cos(k * w * th)) for (a, b), k in zip(amps, ks)),
            2: sum(-(w * k) ** 2 * (a * np.cos(k * w * th) + b * np.sin(k * w * th)) for (a, b), k in zip(amps, ks)),
        }
        field = mg.ReducedField(u, period)
        for order, ref in exact.items():
            scale = max(1.0, float(np.max(np.abs(ref))))
            worst = max(worst, float(np.max(np.abs(field.derivative(order) - ref))) / scale)
        worst = max(worst, float(np.max(np.abs(mg.ReducedField.constant(3.0, n, period).derivative(1)))))
    return SuiteResult("reduced_derivatives", worst < 1e-8, 1e-8, worst, trials)


def suite_q_transform(rng):
    bg = mg.S1xS3()
    res = []
    for n in (64, 128, 256):
        u = mg.ReducedField.from_function(lambda th: 0.1 * np.sin(th), n, scheme="fd4")
        res.append(mg.q_transform_residual(bg, u))
    orders = [math.log2(res[i] / res[i + 1]) for i in range(2)]
    spectral = mg.q_transform_residual(bg, mg.ReducedField.from_function(lambda th: 0.1 * np.sin(th), 256))
    passed = res[-1] < 1e-6 and min(orders) > 3.5 and spectral < 1e-6
    return SuiteResult("q_transform_law", passed, 1e-6, res[-1], 3,
                       f"fd4 residuals {res}, observed orders {orders}, spectral {spectral:.3e}")


# -- continuity solver ---------------------------------------------------------------------


def random_cone_state(rng, n=32, bg=None):
    bg = bg or mg.S1xS3()
    while True:
        t = float(rng.uniform(-2.0, 1.0))
        ks = np.arange(1, 4)
        amps = rng.normal(scale=0.05, size=(3, 2))
        th = mg.grid(n, bg.circumference)
        u = float(rng.normal(scale=0.3)) + sum(
            a * np.cos(k * th) + b * np.sin(k * th) for (a, b), k in zip(amps, ks)
        )
        field = mg.ReducedField(u, bg.circumference)
        endo = mg.conformal_schouten_reduced(bg, field, t)
        if np.all(endo.sigma1 > 0.05) and np.all(endo.sigma2 > 0.05):
            f_sq = np.exp(rng.normal(scale=0.3, size=n)) * 9.0
            return bg, field, f_sq, t


def suite_jacobian(rng, trials=20):
    worst = 0.0
    for _ in range(trials):
        bg, u, f_sq, t = random_cone_state(rng)
        analytic = cs._jacobian(bg, u, f_sq, t)
        fd = cs.finite_difference_jacobian(bg, u, f_sq, t)
        worst = max(worst, float(np.max(np.abs(analytic - fd)) / np.max(np.abs(fd))))
    return SuiteResult("jacobian_consistency", worst < 1e-6, 1e-6, worst, trials)


def _paths():
    bg = mg.S1xS3()
    cfg = cs.SolveConfig(delta=-1.0, t_target=0.0, grid_n=64)
    w = mg.ReducedField.from_function(lambda th: 0.05 * np.cos(th) + 0.02 * np.sin(2 * th), 64)
    out = []
    for factor in (None, w):
        state, trace = cs.continue_path(bg, cfg, factor)
        out.append((bg, state, trace, factor is None))
    return out


def suite_apriori_monitors(rng):
    worst_upper = math.inf
    worst_harnack = math.inf
    worst_lower = math.inf
    worst_const = math.inf
    for bg, state, trace, homogeneous in _paths():
        for rec in trace:
            worst_harnack = min(worst_harnack, cs.harnack_monitor(bg, rec) + 1e-9)
            worst_lower = min(worst_lower, cs.lower_bound_monitor(bg, rec, state.f_squared, il.Y_S4))
            if homogeneous:
                worst_upper = min(worst_upper, cs.upper_bound_monitor(bg, rec, state.f_squared) + 1e-6)
                worst_const = min(worst_const, cs.homogeneous_solution(rec.t, -1.0) + 1e-6 - rec.u_max)
    worst = min(worst_upper, worst_harnack, worst_lower, worst_const)
    return SuiteResult("apriori_monitors", worst >= 0.0, 0.0, worst, 2,
                       f"upper {worst_upper:.3e}, harnack {worst_harnack:.3e}, lower {worst_lower:.3e}")


def suite_operator_concavity(rng, trials=200):
    worst = math.inf
    done = 0
    while done < trials:
        t = float(rng.uniform(-2.0, 1.0))
        base = mg.schouten_t(mg.curvature_of(mg.S1xS3()), t)
        du = rng.normal(scale=0.3, size=4)
        first = np.outer(du, du) - 0.5 * (2.0 - t) * (du @ du) * np.eye(4)

        def a_of(hess):
            return base + hess + 0.5 * (1.0 - t) * np.trace(hess) * np.eye(4) + first

        h1, h2 = (0.5 * ca.random_symmetric(rng, 2))
        a1, a2 = a_of(h1), a_of(h2)
        if not (ca.cone_check(a1).in_gamma2_plus and ca.cone_check(a2).in_gamma2_plus):
            continue
        mid = math.sqrt(ca.sigma2(a_of(0.5 * (h1 + h2))))
        worst = min(worst, mid - 0.5 * (math.sqrt(ca.sigma2(a1)) + math.sqrt(ca.sigma2(a2))))
        done += 1
    return SuiteResult("operator_concavity", worst >= -1e-12, -1e-12, float(worst), trials)


def suite_gradient_stability(rng):
    bg = mg.S1xS3()
    grads = []
    for n in (64, 128, 256):
        cfg = cs.SolveConfig(delta=-1.0, t_target=0.0, grid_n=n)
        w = mg.ReducedField.from_function(lambda th: 0.05 * np.cos(th) + 0.02 * np.sin(2 * th), n)
        _, trace = cs.continue_path(bg, cfg, w)
        grads.append(max(r.grad_max for r in trace))
    spread = (max(grads) - min(grads)) / max(grads)
    return SuiteResult("gradient_stability", spread < 0.1, 0.1, spread, 3, f"grad_max per N: {grads}")


# -- Paneitz ------------------------------------------------------------------------------------


def _random_band_limited(rng, n=64, period=2.0 * math.pi, kmax=8):
    th = mg.grid(n, period)
    w = 2.0 * math.pi / period
    coeffs = rng.normal(size=(kmax + 1, 2)) / (1.0 + np.arange(kmax + 1))[:, None] ** 2
    u = sum(a * np.cos(k * w * th) + b * np.sin(k * w * th) for k, (a, b) in enumerate(coeffs))
    return mg.ReducedField(u, period)


def suite_paneitz_self_adjoint(rng, trials=50):
    bg = mg.S1xS3()
    worst = 0.0
    for _ in range(trials):
        phi, psi = _random_band_limited(rng), _random_band_limited(rng)
        lhs = phi.integrate(ps.paneitz_apply_reduced(bg, phi) * psi.samples)
        rhs = phi.integrate(phi.samples * ps.paneitz_apply_reduced(bg, psi))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return SuiteResult("paneitz_self_adjoint", worst < 1e-9, 1e-9, worst, trials)


def suite_bochner(rng, trials=50):
    bg = mg.S1xS3()
    worst_split = 0.0
    worst_lower = math.inf
    for _ in range(trials):
        phi = _random_band_limited(rng)
        rep = ps.quadratic_form(bg, phi)
        worst_split = max(worst_split, rep.decomposition_residual / rep.l2_norm_sq)
        worst_lower = min(worst_lower, (rep.form_value - rep.hessian_term) / rep.l2_norm_sq + 1e-8)
    passed = worst_split < 1e-8 and worst_lower >= 0.0
    return SuiteResult("bochner_split", passed, 1e-8, worst_split, trials, f"form - hessian slack {worst_lower:.3e}")


def suite_paneitz_conformal_constant(rng, trials=20):
    bg = mg.S1xS3()
    worst = 0.0
    for _ in range(trials):
        phi = _random_band_limited(rng)
        c = float(rng.uniform(-1.0, 1.0))
        base = phi.integrate(ps.paneitz_apply_reduced(bg, phi) * phi.samples)
        # P~ = exp(4c) P and dvol~ = exp(-4c) dvol
        scaled = math.exp(-4.0 * c) * phi.integrate(math.exp(4.0 * c) * ps.paneitz_apply_reduced(bg, phi) * phi.samples)
        worst = max(worst, abs(scaled - base) / max(1.0, abs(base)))
    return SuiteResult("paneitz_conformal_constant", worst < 1e-12, 1e-12, worst, trials)


def suite_product_spectrum_sign(rng):
    s2 = ps.ProductSpectrumInput(1.0, 1.0, (0.0, 2.0, 6.0, 12.0), (0.0, 2.0, 6.0, 12.0))
    hyp = ps.ProductSpectrumInput(-1.0, -1.0, (0.0, 0.1, 1.0), (0.0, 0.1, 1.0))
    s2_min = float(np.min(ps.product_paneitz_spectrum(s2)[1:]))
    hyp_min = float(np.min(ps.product_paneitz_spectrum(hyp)))
    cert_s2 = ps.positivity_certificate(mg.ProductSurfaces(1.0, 1.0, 4 * math.pi, 4 * math.pi))
    cert_h = ps.positivity_certificate(mg.ProductSurfaces(-1.0, -1.0, 4 * math.pi, 4 * math.pi), hyp)
    passed = (s2_min > 0.0 and hyp_min < 0.0 and cert_s2.positive_semidefinite
              and not cert_h.positive_semidefinite and cert_h.witness is not None)
    return SuiteResult("product_spectrum_sign", passed, 0.0, hyp_min, 2, f"S2xS2 nonzero min {s2_min}")


def suite_reduced_symbol(rng):
    bg = mg.S1xS3()
    worst = 0.0
    for k in range(1, 12):
        phi = mg.ReducedField.from_function(lambda th: np.cos(k * th), 64)
        rep = ps.quadratic_form(bg, phi)
        expected = float(ps.reduced_symbol(k)) * rep.l2_norm_sq
        worst = max(worst, abs(rep.form_value - expected) / expected)
    return SuiteResult("reduced_symbol", worst < 1e-9, 1e-9, worst, 11)


# -- ledger ------------------------------------------------------------------------------------------


def suite_ledger(rng):
    recs = il.builtin_records()
    worst = max(r.cgb_residual for r in recs.values())
    disagreements = 0
    for r in recs.values():
        if r.yamabe <= 0:
            continue
        _, main = il.check_assumption_main(r, 0.0)
        disagreements += main != il.check_assumption_paneitz(r)
    return SuiteResult("ledger_consistency", worst < 1e-9 and disagreements == 0, 1e-9, worst, len(recs))


def suite_f2_formulas(rng):
    worst = 0.0
    for bg in FRAME_BACKGROUNDS:
        a, b = il.f2_both(mg.curvature_of(bg))
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return SuiteResult("f2_two_formulas", worst < 1e-10, 1e-10, worst, len(FRAME_BACKGROUNDS))


SUITES: dict[str, Callable] = {
    "cone_convexity": suite_cone_convexity,
    "newton_positivity": suite_newton_positivity,
    "garding_concavity": suite_garding_concavity,
    "hat_identities": suite_hat_identities,
    "pinching_positivity": suite_pinching_positivity,
    "frame_invariance": suite_frame_invariance,
    "shift_identity": suite_shift_identity,
    "chern_gauss_bonnet": suite_cgb,
    "q_integral_half_f2": suite_q_integral,
    "constant_rescaling": suite_constant_rescaling,
    "reduced_derivatives": suite_reduced_derivatives,
    "q_transform_law": suite_q_transform,
    "jacobian_consistency": suite_jacobian,
    "apriori_monitors": suite_apriori_monitors,
    "operator_concavity": suite_operator_concavity,
    "gradient_stability": suite_gradient_stability,
    "paneitz_self_adjoint": suite_paneitz_self_adjoint,
    "bochner_split": suite_bochner,
    "paneitz_conformal_constant": suite_paneitz_conformal_constant,
    "product_spectrum_sign": suite_product_spectrum_sign,
    "reduced_symbol": suite_reduced_symbol,
    "ledger_consistency": suite_ledger,
    "f2_two_formulas": suite_f2_formulas,
}


def run_all(seed: int = 42, names=None) -> list[SuiteResult]:
    results = []
    for name, fn in SUITES.items():
        if names and name not in names:
            continue
        rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
        try:
            results.append(fn(rng))
        except Exception as exc:  # a crashing suite is a failing suite
            results.append(SuiteResult(name, False, float("nan"), float("nan"), 0, f"{type(exc).__name__}: {exc}"))
    return results

