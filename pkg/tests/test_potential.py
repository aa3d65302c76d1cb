import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ringgas import (
    build_from_laplacian_profile,
    builtin_cubic,
    custom,
    detect_criticality,
    droplet,
    validate_admissibility,
)
from ringgas.errors import (
    DomainError,
    InvalidPotentialError,
    InvalidProfileError,
    NotCriticalError,
    UnsupportedOrderError,
)
from ringgas.potential import eval_derivative, radial_laplacian

S3 = math.sqrt(3.0)


def test_cubic_values(cubic):
    assert math.isclose(eval_derivative(cubic, 1.0, 1), 2.0 - S3, rel_tol=1e-14)
    assert math.isclose(eval_derivative(cubic, 1 / S3, 0), 11.0 / (18.0 * S3), rel_tol=1e-14)
    assert eval_derivative(cubic, 2.0, 4) == 0.0


def test_cubic_laplacian_closed_form(cubic):
    r = np.linspace(0.1, 4.0, 50)
    np.testing.assert_allclose(radial_laplacian(cubic, r), 3 * r - 2 * S3 + 1 / r, rtol=1e-12, atol=1e-12)
    assert abs(radial_laplacian(cubic, 1 / S3)) < 1e-14
    assert math.isclose(radial_laplacian(cubic, 1 / S3, 2), 6 * S3, rel_tol=1e-13)


def test_laplacian_is_composed_from_derivatives(cubic, quartic_ring):
    r = np.geomspace(0.05, 5.0, 40)
    for pot in (cubic, quartic_ring):
        expected = eval_derivative(pot, r, 2) + eval_derivative(pot, r, 1) / r
        np.testing.assert_array_equal(radial_laplacian(pot, r, 0), expected)


def test_domain_and_order_errors(cubic):
    with pytest.raises(DomainError):
        eval_derivative(cubic, 0.0, 1)
    with pytest.raises(DomainError):
        eval_derivative(cubic, -1.0, 0)
    with pytest.raises(UnsupportedOrderError):
        eval_derivative(cubic, 1.0, cubic.max_derivative_order + 1)
    with pytest.raises(InvalidPotentialError):
        builtin_cubic(-1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(r=st.floats(min_value=0.05, max_value=5.0), k=st.integers(min_value=1, max_value=5))
def test_derivatives_match_finite_differences(cubic, quartic_ring, r, k):
    h = 1e-4 * r
    for pot in (cubic, quartic_ring):
        fd = (eval_derivative(pot, r + h, k - 1) - eval_derivative(pot, r - h, k - 1)) / (2 * h)
        exact = eval_derivative(pot, r, k)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_q_is_integral_of_its_derivative(cubic):
    val, _ = integrate.quad(lambda r: eval_derivative(cubic, r, 1), 0.3, 2.5, epsabs=1e-14)
    assert math.isclose(val, eval_derivative(cubic, 2.5, 0) - eval_derivative(cubic, 0.3, 0),
                        rel_tol=1e-12)


def test_criticality_of_cubic(crit):
    assert crit.m == 1
    assert math.isclose(crit.r_star, 1 / S3, rel_tol=1e-12)
    assert math.isclose(crit.gamma, 6 * S3, rel_tol=1e-9)
    assert math.isclose(crit.kappa, 0.5 * crit.r_star * crit.gamma ** 0.25, rel_tol=1e-15)
    assert abs(crit.kappa - 0.5183) < 1e-4
    assert math.isclose(crit.tau_star, 1 / (6 * S3), rel_tol=1e-10)
    assert crit.droplet_kind == "disk"


def test_criticality_invariant_laplacian_small(cubic, crit):
    assert abs(radial_laplacian(cubic, crit.r_star)) <= 1e-12


def test_ginibre_is_not_critical(ginibre):
    with pytest.raises(NotCriticalError):
        detect_criticality(ginibre)


def test_subharmonic_cubic_is_not_critical():
    with pytest.raises(NotCriticalError):
        detect_criticality(builtin_cubic(1.0, 1.0))


def test_quartic_ring_has_order_two(quartic_ring):
    c = detect_criticality(quartic_ring)
    assert c.m == 2
    assert abs(c.r_star - 1.0) < 1e-6
    # fourth derivative of (1 + r)(r - 1)^4 at 1 is 4! * 2
    assert math.isclose(c.gamma, 48.0, rel_tol=1e-9)
    assert c.scale_exponent == pytest.approx(1 / 6)


def test_supercritical_cubic_has_negative_laplacian():
    pot = builtin_cubic(2.0, 1.0)
    assert abs(radial_laplacian(pot, 1.0)) < 1e-14
    assert abs(radial_laplacian(pot, 1.0 / 3.0)) < 1e-13
    assert radial_laplacian(pot, 2.0 / 3.0) < 0


def test_profile_constant_gives_ginibre():
    pot = build_from_laplacian_profile([4.0])
    r = np.linspace(0.1, 3, 20)
    np.testing.assert_allclose(pot(r), r ** 2, rtol=1e-14)


def test_profile_recovers_cubic():
    pot = build_from_laplacian_profile([-2 * S3, 3.0], inverse_r=1.0, base_slope=1.0)
    r = np.linspace(0.1, 3, 20)
    np.testing.assert_allclose(pot.derivative(r, 1), r ** 2 - S3 * r + 1, rtol=1e-13, atol=1e-14)


def test_profile_annulus_fixture():
    pot = build_from_laplacian_profile([2.0, -4.0, 2.0], inner_radius=0.2, base_slope=0.0)
    assert abs(pot.derivative(0.2, 1)) < 1e-14
    drop = droplet(pot)
    assert drop.kind == "annulus"
    assert abs(drop.r0 - 0.2) < 1e-12


def test_profile_reproduces_laplacian():
    w = np.polynomial.Polynomial([0.5, -1.0, 0.75])
    pot = build_from_laplacian_profile(w, inner_radius=0.3, base_slope=0.1)
    r = np.linspace(0.3, 4.0, 200)
    np.testing.assert_allclose(radial_laplacian(pot, r), w(r), rtol=1e-8)


def test_numeric_profile_reproduces_laplacian():
    wfun = lambda r: 8.0 * (np.asarray(r) - 1.0) ** 2 + 0.5
    pot = build_from_laplacian_profile(wfun)
    assert pot.low_accuracy
    r = np.linspace(0.2, 3.0, 50)
    np.testing.assert_allclose(radial_laplacian(pot, r), wfun(r), rtol=1e-6)


def test_tabulated_profile_with_double_zero():
    r = np.linspace(0.0, 6.0, 1201)
    pot = build_from_laplacian_profile((r, 8.0 * (r - 1.0) ** 2))
    c = detect_criticality(pot)
    assert c.m == 1
    assert abs(c.r_star - 1.0) < 1e-4
    assert abs(c.gamma - 16.0) < 1e-2


def test_negative_profile_rejected():
    with pytest.raises(InvalidProfileError):
        build_from_laplacian_profile([1.0, -1.0])


def test_admissibility_reports():
    assert validate_admissibility(builtin_cubic(S3, 1.0)).ok
    bad = validate_admissibility(builtin_cubic(2.0, 1.0))
    assert not bad.laplacian_ok
    assert 1 / 3 < bad.laplacian_violation < 1.0
    slow = custom([lambda r: np.log1p(r), lambda r: 1 / (1 + r), lambda r: -1 / (1 + r) ** 2,
                   lambda r: 2 / (1 + r) ** 3, lambda r: -6 / (1 + r) ** 4, lambda r: 24 / (1 + r) ** 5])
    rep = validate_admissibility(slow)
    assert not rep.growth_ok and rep.growth_violation is not None


def test_custom_numeric_fallback_is_flagged():
    evals = [lambda r: r ** 2, lambda r: 2 * r, lambda r: 2 + 0 * r]
    pot = custom(evals, numeric_fallback=3)
    assert pot.low_accuracy and pot.max_derivative_order == 5
    assert abs(pot.derivative(1.3, 3)) < 1e-6
    with pytest.raises(InvalidPotentialError):
        custom(evals)
