import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conformal4 import cone_algebra as ca
from conformal4.errors import ConeViolation

from oracles import pair_sum

S1XS3_A1 = ca.diag4(-0.5, 0.5, 0.5, 0.5)
S4_A1 = 0.5 * np.eye(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20031)


# -- sigma1 / sigma2 ---------------------------------------------------------


@pytest.mark.parametrize(
    "a, expected",
    [(np.eye(4), 4.0), (ca.diag4(0, 1, 1, 1), 3.0), (S1XS3_A1, 1.0)],
)
def test_sigma1_examples(a, expected):
    assert ca.sigma1(a) == pytest.approx(expected, abs=1e-15)


def test_s1xs3_schouten_from_ricci():
    ric = ca.diag4(0, 2, 2, 2)
    a1 = 0.5 * (ric - 6.0 / 6.0 * np.eye(4))
    np.testing.assert_allclose(a1, S1XS3_A1)


@pytest.mark.parametrize(
    "a, expected",
    [(np.eye(4), 6.0), (S4_A1, pair_sum([0.5] * 4)), (S1XS3_A1, pair_sum([-0.5, 0.5, 0.5, 0.5]))],
)
def test_sigma2_examples(a, expected):
    assert ca.sigma2(a) == pytest.approx(expected, abs=1e-15)
    assert pair_sum([0.5] * 4) == 1.5


def test_sigma2_matches_eigenvalue_pair_sum(rng):
    a = ca.random_symmetric(rng, 200)
    lam = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(ca.sigma2(a), ca.sigma2_from_eigenvalues(lam), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(ca.sigma1(a), lam.sum(axis=1), rtol=1e-12, atol=1e-13)


# -- eigenvalues --------------------------------------------------------------


def test_jacobi_matches_lapack(rng):
    a = ca.random_symmetric(rng, 100) * 3.0
    np.testing.assert_allclose(ca.eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-11)


def test_jacobi_sorted_and_handles_diagonal():
    np.testing.assert_array_equal(ca.eigenvalues(ca.diag4(3, -1, 2, 0)), [-1, 0, 2, 3])


def test_jacobi_degenerate_spectrum(rng):
    q = ca.random_orthogonal(rng)
    a = q @ ca.diag4(1, 1, 1, -2) @ q.T
    np.testing.assert_allclose(ca.eigenvalues(0.5 * (a + a.T)), [-2, 1, 1, 1], atol=1e-12)


def test_asymmetric_input_rejected():
    a = np.eye(4)
    a[0, 1] = 1.0
    with pytest.raises(ValueError):
        ca.eigenvalues(a)


# -- cone --------------------------------------------------------------------


def test_cone_check_examples():
    v = ca.cone_check(ca.diag4(0, 1, 1, 1))
    assert v.in_gamma2_plus and v.sigma1 == 3.0 and v.sigma2 == 3.0 and v.margin == 3.0
    boundary = ca.cone_check(S1XS3_A1)
    assert not boundary.in_gamma2_plus
    assert boundary.sigma2 == 0.0
    neg = ca.cone_check(-np.eye(4))
    assert not neg.in_gamma2_plus and neg.sigma1 == -4.0


def test_cone_verdict_invariant(rng):
    for a in ca.random_symmetric(rng, 300):
        v = ca.cone_check(a)
        assert v.in_gamma2_plus == (v.sigma1 > 0 and v.sigma2 > 0)
        assert v.margin == min(v.sigma1, v.sigma2)


def test_require_cone_reports_first_index():
    stack = np.stack([np.eye(4), np.eye(4), -np.eye(4)])
    with pytest.raises(ConeViolation) as info:
        ca.require_cone(stack)
    assert info.value.index == 2


# -- transforms --------------------------------------------------------------


def test_newton_transform_examples():
    np.testing.assert_array_equal(ca.newton_transform(ca.diag4(0, 1, 1, 1)), ca.diag4(3, 2, 2, 2))
    np.testing.assert_array_equal(ca.newton_transform(np.eye(4)), 3 * np.eye(4))


def test_l_operator_examples():
    a = ca.diag4(0, 1, 1, 1)
    np.testing.assert_array_equal(ca.l_operator(a, 1.0), ca.newton_transform(a))
    np.testing.assert_allclose(ca.l_operator(a, 0.0), ca.diag4(7.5, 6.5, 6.5, 6.5))


def test_l_operator_can_lose_positivity_above_one():
    # t > 1 removes the guarantee: large t drives the shift negative
    a = ca.diag4(0, 1, 1, 1)
    assert ca.min_eigenvalue(ca.l_operator(a, 3.0)) < 0


def test_hat_reflection_examples():
    a = ca.diag4(0, 1, 1, 1)
    h = ca.hat_reflection(a)
    np.testing.assert_allclose(h, ca.diag4(1.5, 0.5, 0.5, 0.5))
    assert ca.sigma1(h) == 3.0 and ca.sigma2(h) == pytest.approx(3.0, abs=1e-14)
    np.testing.assert_array_equal(ca.hat_reflection(2.5 * np.eye(4)), 2.5 * np.eye(4))


def test_hat_reflection_is_involution(rng):
    a = ca.random_symmetric(rng, 50)
    np.testing.assert_allclose(ca.hat_reflection(ca.hat_reflection(a)), a, atol=1e-14)


def test_pinching_second_tensor_is_newton_of_hat(rng):
    a = ca.random_symmetric(rng, 50)
    _, second = ca.pinching_tensors(a)
    np.testing.assert_allclose(second, ca.newton_transform(ca.hat_reflection(a)), atol=1e-13)


def test_concavity_gap_examples():
    assert ca.concavity_gap(np.eye(4), np.eye(4), 0.5) == pytest.approx(0.0, abs=1e-15)
    assert ca.concavity_gap(ca.diag4(0, 1, 1, 1), np.eye(4), 0.0) == pytest.approx(0.0, abs=1e-15)
    a, b = ca.diag4(0, 1, 1, 1), np.eye(4)
    mid = ca.diag4(0.5, 1, 1, 1)
    expected = math.sqrt(pair_sum([0.5, 1, 1, 1])) - 0.5 * math.sqrt(3) - 0.5 * math.sqrt(6)
    gap = ca.concavity_gap(a, b, 0.5)
    assert gap == pytest.approx(expected, abs=1e-14)
    assert gap >= 0.0
    assert ca.sigma2(mid) == pair_sum([0.5, 1, 1, 1])


def test_concavity_gap_rejects_outside_cone():
    with pytest.raises(ConeViolation):
        ca.concavity_gap(S1XS3_A1, np.eye(4), 0.3)
    with pytest.raises(ValueError):
        ca.concavity_gap(np.eye(4), np.eye(4), 1.5)


# -- t shift -------------------------------------------------------------------


@pytest.mark.parametrize("t", [-2.0, -1.0, 0.0, 0.3, 1.0])
def test_t_shift_round_s4(t):
    at = ca.t_shift(S4_A1, t)
    assert ca.sigma2(at) == pytest.approx(1.5 * (2 * t - 3) ** 2, rel=1e-12)
    assert ca.sigma2(at) == pytest.approx(ca.shift_identity_rhs(S4_A1, t), rel=1e-12)


def test_t_shift_round_s4_t0_value():
    assert ca.sigma2(ca.t_shift(S4_A1, 0.0)) == pytest.approx(13.5, rel=1e-14)


@pytest.mark.parametrize("t", [-2.0, -1.0, 0.0, 0.5, 1.0])
def test_t_shift_s1xs3(t):
    assert ca.sigma2(ca.t_shift(S1XS3_A1, t)) == pytest.approx(1.5 * (2 - t) * (1 - t), abs=1e-13)


def test_t_shift_identity_at_one(rng):
    a = ca.random_symmetric(rng, 5)
    np.testing.assert_array_equal(ca.t_shift(a, 1.0), a)


# -- properties ----------------------------------------------------------------

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
sym_entries = arrays(np.float64, (4, 4), elements=finite).map(lambda m: 0.5 * (m + m.T))


@settings(max_examples=200, deadline=None)
@given(sym_entries, st.floats(-3, 1))
def test_shift_identity_property(a1, t):
    lhs = ca.sigma2(ca.t_shift(a1, t))
    rhs = ca.shift_identity_rhs(a1, t)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))


@settings(max_examples=200, deadline=None)
@given(sym_entries)
def test_hat_preserves_sigmas(a):
    h = ca.hat_reflection(a)
    for f in (ca.sigma1, ca.sigma2):
        assert abs(f(h) - f(a)) <= 1e-12 * max(1.0, abs(f(a)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_frame_invariance_property(seed):
    rng = np.random.default_rng(seed)
    a = ca.random_symmetric(rng, 1)[0]
    q = ca.random_orthogonal(rng)
    b = q @ a @ q.T
    assert abs(ca.sigma1(a) - ca.sigma1(b)) <= 1e-10 * max(1.0, abs(ca.sigma1(a)))
    assert abs(ca.sigma2(a) - ca.sigma2(b)) <= 1e-10 * max(1.0, abs(ca.sigma2(a)))


def test_random_cone_samples_include_indefinite_matrices(rng):
    lam = ca.random_cone_eigenvalues(rng, 1000)
    assert np.all(lam.sum(axis=1) > 0) and np.all(ca.sigma2_from_eigenvalues(lam) > 0)
    assert np.any(lam.min(axis=1) < 0)


def test_newton_and_l_positivity_on_cone(rng):
    a = ca.random_cone_matrices(rng, 1000)
    assert np.all(np.linalg.eigvalsh(ca.newton_transform(a))[:, 0] > 0)
    for t in (-2.0, -1.0, 0.0, 0.5, 1.0):
        assert np.all(np.linalg.eigvalsh(ca.l_operator(a, t))[:, 0] > 0)
