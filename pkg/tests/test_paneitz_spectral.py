import math
from fractions import Fraction

import numpy as np
import pytest

from conformal4 import model_geometry as mg
from conformal4 import paneitz_spectral as ps
from conformal4.errors import ConfigurationError, UnsupportedBackground

BG = mg.S1xS3()
HYP = mg.ProductSurfaces(-1.0, -1.0, 4 * math.pi, 4 * math.pi)
S2S2 = mg.ProductSurfaces(1.0, 1.0, 4 * math.pi, 4 * math.pi)


def band_limited(rng, n=64, kmax=8):
    th = mg.grid(n, 2 * math.pi)
    a, b = rng.normal(size=(2, kmax))
    vals = sum(a[k - 1] * np.cos(k * th) + b[k - 1] * np.sin(k * th) for k in range(1, kmax + 1))
    return mg.ReducedField(vals + rng.normal())


def test_reduced_operator_on_fourier_modes():
    for k in (0, 1, 3, 7):
        phi = mg.ReducedField.from_function(lambda th: np.cos(k * th), 64)
        np.testing.assert_allclose(ps.paneitz_apply_reduced(BG, phi), (k**4 + 4 * k**2) * phi.samples, atol=1e-9)
    assert ps.reduced_symbol(1) == 5.0
    assert ps.reduced_symbol(0) == 0.0


def test_reduced_operator_is_self_adjoint():
    rng = np.random.default_rng(3)
    a, b = band_limited(rng), band_limited(rng)
    left = a.integrate(ps.paneitz_apply_reduced(BG, a) * b.samples)
    right = a.integrate(a.samples * ps.paneitz_apply_reduced(BG, b))
    assert left == pytest.approx(right, rel=1e-10)


def test_bochner_split_on_s1xs3():
    rng = np.random.default_rng(11)
    for _ in range(10):
        rep = ps.quadratic_form(BG, band_limited(rng))
        assert rep.decomposition_residual < 1e-8 * rep.l2_norm_sq
        assert rep.form_value >= rep.hessian_term - 1e-8 * rep.l2_norm_sq


@pytest.mark.parametrize("lam, mu", [(0.0, 0.0), (2.0, 0.0), (2.0, 6.0), (0.1, 0.1)])
def test_bochner_split_on_product_modes(lam, mu):
    for bg in (S2S2, HYP):
        rep = ps.quadratic_form(bg, ps.ProductMode(lam, mu))
        assert rep.decomposition_residual < 1e-12


def test_quadratic_form_unsupported():
    with pytest.raises(UnsupportedBackground):
        ps.quadratic_form(mg.RoundS4(), mg.ReducedField.constant(0.0, 16))
    with pytest.raises(UnsupportedBackground):
        ps.quadratic_form(mg.ConstantsOnly("S4", 2, 0.0, 1.0, 8 * math.pi**2), None)


def test_product_eigenvalue_hyperbolic():
    lam = np.linspace(0, 3, 7)
    np.testing.assert_allclose(ps.product_paneitz_eigenvalue(lam, 0.0, -1, -1), lam**2 - 2 * lam / 3, atol=1e-14)
    exact = Fraction(1, 10) ** 2 - Fraction(2, 3) * Fraction(1, 10)
    assert exact == Fraction(-17, 300)
    assert ps.product_paneitz_eigenvalue(0.1, 0.0, -1, -1) == pytest.approx(-17 / 300, abs=1e-12)


def test_product_spectrum_s2xs2_nonnegative():
    eigs = tuple(float(l * (l + 1)) for l in range(6))
    table = ps.product_spectrum_table(ps.ProductSpectrumInput(1.0, 1.0, eigs, eigs))
    assert np.all(table[:, 2] >= 0.0)
    zero = table[table[:, 2] == 0.0]
    assert zero.shape[0] == 1 and zero[0, 0] == 0.0 and zero[0, 1] == 0.0


def test_spectrum_table_is_sorted():
    table = ps.product_spectrum_table(ps.ProductSpectrumInput(-1, -1, (0, 0.1, 1), (0, 0.1, 1)))
    assert np.all(np.diff(table[:, 2]) >= 0)
    assert table[0, 2] == pytest.approx(-7 / 75, abs=1e-12)


@pytest.mark.parametrize("eigs", [(), (0.1, 1.0), (0.0, -1.0), (0.0, 2.0, 1.0)])
def test_spectrum_input_validation(eigs):
    with pytest.raises(ConfigurationError):
        ps.ProductSpectrumInput(-1, -1, eigs, (0.0,))


def test_certificate_positive_backgrounds():
    for bg in (mg.RoundS4(), S2S2, BG):
        cert = ps.positivity_certificate(bg)
        assert cert.positive_semidefinite and cert.condition_holds and cert.condition_margin >= 0


def test_certificate_hyperbolic_witness():
    spec = ps.ProductSpectrumInput(-1, -1, (0, 0.1, 1), (0, 2, 5))
    cert = ps.positivity_certificate(HYP, spec)
    assert not cert.positive_semidefinite and cert.condition_margin < 0
    assert cert.witness["lambda"] == 0.1 and cert.witness["mu"] == 0.0
    assert cert.witness["form_value"] == pytest.approx(-17 / 300, abs=1e-12)


def test_certificate_rejects_bad_factor():
    with pytest.raises(ConfigurationError):
        ps.positivity_certificate(S2S2, ricci_factor=4.0)


def test_evaluate_f_constant_invariance():
    for c in (-0.3, 0.0, 0.7):
        assert ps.evaluate_F(mg.RoundS4(), c) == pytest.approx(
            -8 * math.pi**2 * math.log(8 * math.pi**2 / 3), rel=1e-13
        )


def test_evaluate_f_reduced_field():
    phi = mg.ReducedField.from_function(lambda th: 0.2 * np.cos(th), 64)
    # int Q = 0 on S1xS3, so F is the Paneitz pairing alone
    assert ps.evaluate_F(BG, phi) == pytest.approx(5 * 0.04 * 0.5 * 4 * math.pi**3, rel=1e-12)
    with pytest.raises(UnsupportedBackground):
        ps.evaluate_F(BG, [0.0, 1.0])
