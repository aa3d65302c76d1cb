import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringgas.universal import (
    _constant_integrand,
    f1,
    f1_direct,
    h1,
    homogeneous_exponent,
    k_star,
    k_star_detail,
    p_poly,
    pearcey,
    pearcey_small_theta_limit,
    rho,
    universal_constant,
    universal_constant_detail,
)


def test_p_poly_values():
    assert p_poly(1, 0.0) == 0.0
    assert abs(p_poly(1, -1.0) - 1 / 8) < 1e-15
    assert abs(p_poly(1, 1.0) - 11 / 24) < 1e-15


@settings(max_examples=80, deadline=None)
@given(m=st.integers(1, 4), y=st.floats(-3, 3), x=st.floats(0.05, 3))
def test_homogeneous_identity(m, y, x):
    direct = x ** (2 * m + 2) * p_poly(m, y / x - 1)
    got = homogeneous_exponent(m, y, x)
    assert abs(got - direct) <= 1e-12 * max(1.0, abs(direct)) + 1e-12 * x ** (2 * m + 2)


def _pearcey_oracle(m, theta):
    mpmath.mp.dps = 30
    deg = 2 * m + 2
    coeffs = [mpmath.mpf(1) / (math.factorial(deg - k) * math.factorial(k)) for k in range(2, deg + 1)]
    poly = lambda y: sum(c * y ** k for c, k in zip(coeffs, range(2, deg + 1)))
    return float(mpmath.quad(lambda y: mpmath.exp(-theta * poly(y)), [-mpmath.inf, -2, 0, 2, mpmath.inf]))


@pytest.mark.parametrize("m,theta", [(1, 0.01), (1, 1.0), (1, 37.0), (1, 500.0), (2, 3.0), (3, 10.0)])
def test_pearcey_against_mpmath(m, theta):
    assert abs(pearcey(m, theta) / _pearcey_oracle(m, theta) - 1) < 1e-11


def test_pearcey_large_theta():
    theta = 100.0
    leading = math.sqrt(4 * math.pi / theta)
    assert abs(pearcey(1, theta) - leading * (1 + 7 / (6 * theta))) / leading < 1e-3
    # the first correction alone already explains most of the gap
    for theta in (20.0, 50.0, 200.0, 1000.0):
        rel = abs(pearcey(1, theta) * math.sqrt(theta) / math.sqrt(4 * math.pi) - 1)
        assert rel <= 2 / theta


def test_pearcey_small_theta():
    theta = 1e-8
    assert abs(theta ** 0.25 * pearcey(1, theta) / pearcey_small_theta_limit(1) - 1) < 0.01


def test_pearcey_monotone_and_rejects_bad_theta():
    th = np.geomspace(1e-4, 1e4, 60)
    assert np.all(np.diff(pearcey(1, th)) < 0)
    with pytest.raises(ValueError):
        pearcey(1, 0.0)
    with pytest.raises(ValueError):
        pearcey(7, 1.0)


@pytest.mark.parametrize("x", [-1.5, -0.3, 0.2, 0.9, 2.5])
def test_f1_two_routes(crit, x):
    assert abs(f1(crit.gamma, x) - f1_direct(crit.gamma, x)) < 1e-9 * f1(crit.gamma, x)


def test_f1_even_and_h1_bridge(crit):
    g = crit.gamma
    xs = np.linspace(0.1, 3, 17)
    np.testing.assert_allclose(f1(g, -xs), f1(g, xs), rtol=1e-13)
    np.testing.assert_allclose(h1(g, xs), np.sqrt(g / (4 * np.pi)) * xs * f1(g, xs), rtol=1e-14)


def test_universal_constant_value():
    assert abs(universal_constant(1) - 1.603564593891) < 1e-11


def test_universal_constant_mesh_and_cutoff_stability():
    base = universal_constant_detail(1).value
    assert abs(universal_constant_detail(1, panels_per_unit=4.0).value - base) < 1e-3
    assert abs(universal_constant_detail(1, cutoff=400.0).value - base) < 1e-3
    assert universal_constant_detail(1).error_estimate < 1e-6


def test_constant_tail_coefficient():
    assert abs(float(_constant_integrand(1, np.array([10.0]))[0]) / (7 / 600) - 1) < 0.05


@pytest.mark.parametrize("m", [2, 3])
def test_higher_order_constants_are_finite(m):
    res = universal_constant_detail(m)
    assert math.isfinite(res.value) and res.value > 0


def test_kstar_structure():
    assert k_star(1, 0.3, 0.3).real > 0 and abs(k_star(1, 0.3, 0.3).imag) < 1e-14
    a, b = 1 + 1j, -1 + 0.5j
    assert abs(k_star(1, a, b) - np.conj(k_star(1, b, a))) < 1e-12
    assert abs(k_star(1, 1 + 1j, -1) - 0.4568040541) < 1e-8
    assert k_star_detail(1, a, b).error_estimate < 1e-8


def test_rho_symmetries():
    for x in (0.0, 0.7, 2.0):
        assert abs(rho(1, x) - rho(1, -x)) < 1e-12
        assert abs(rho(1, complex(x, 2.0)) - rho(1, x)) == 0.0
        assert abs(k_star(1, complex(x, 2.0), complex(x, 2.0)).real - rho(1, x)) < 1e-12
    assert abs(rho(1, 0.0) - 0.5274381913470515) < 1e-7


def test_rho_approaches_bulk_density():
    dev = [abs(rho(1, x) / (x * x / 2) - 1) for x in (3.0, 6.0)]
    assert dev[1] < dev[0] < 0.05
    xs = np.linspace(2.0, 6.0, 9)
    vals = [rho(1, x) for x in xs]
    assert np.all(np.diff(vals) > 0)
