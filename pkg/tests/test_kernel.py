import cmath
import math
import warnings

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gammaincc

from ringgas import expected_count, kernel_full, kernel_windowed, log_norm_table, mean_level_spacing
from ringgas.errors import DomainError
from ringgas.kernel import DiagonalProfile, double_scaling_error, predicted_spacing, total_mass


def ginibre_diag(n, r):
    """K_n(z, z) for q = |z|^2 in the dA/pi normalisation."""
    return n * gammaincc(n, n * np.asarray(r) ** 2)


def test_ginibre_origin(ginibre):
    for n in (1, 5, 40):
        assert abs(kernel_full(ginibre, n, 0, 0).modulus - n) < 1e-12 * n


@pytest.mark.parametrize("r", [0.3, 0.9])
def test_ginibre_diagonal_oracle(ginibre, r):
    n = 50
    k = kernel_full(ginibre, n, r, r)
    assert abs(k.modulus / ginibre_diag(n, r) - 1) < 1e-10
    assert k.phase == 0.0


def test_ginibre_off_diagonal(ginibre):
    n = 30
    z, w = 0.4 + 0.2j, -0.1 + 0.5j
    js = np.arange(n)
    from scipy.special import gammaln

    terms = np.exp((js + 1) * math.log(n) - gammaln(js + 1)) * (z * np.conj(w)) ** js
    expected = terms.sum() * math.exp(-n * (abs(z) ** 2 + abs(w) ** 2) / 2)
    k = kernel_full(ginibre, n, z, w)
    assert abs(k.modulus * cmath.exp(1j * k.phase) - expected) < 1e-10 * abs(expected)


def test_hermitian_and_rotation_invariance(cubic):
    n = 200
    table = log_norm_table(cubic, n)
    a, b = 0.55 + 0.1j, 0.4 - 0.3j
    k1, k2 = kernel_full(cubic, n, a, b, table), kernel_full(cubic, n, b, a, table)
    assert abs(k1.modulus - k2.modulus) < 1e-12 * k1.modulus
    assert abs(k1.phase + k2.phase) < 1e-12
    ref = kernel_full(cubic, n, abs(a), abs(a), table).modulus
    for ang in (0.3, 1.7, 3.0):
        rot = abs(a) * cmath.exp(1j * ang)
        assert abs(kernel_full(cubic, n, rot, rot, table).modulus - ref) < 1e-12 * ref


def test_windowed_converges_to_full(cubic, crit):
    n = 2000
    table = log_norm_table(cubic, n)
    z = crit.r_star + 0.02
    full = kernel_full(cubic, n, z, z, table).modulus
    errs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for M in (0.25, 0.5, 1.0):
            kv = kernel_windowed(cubic, crit, n, z, z, M, table)
            assert kv.truncated and kv.window is not None
            errs.append(abs(kv.modulus - full))
        big = kernel_windowed(cubic, crit, n, z, z, 50.0, table)
    assert errs[0] >= errs[1] >= errs[2]
    assert big.window.j_lo == 0 and big.window.j_hi == n - 1
    assert abs(big.modulus - full) < 1e-12 * full


def test_windowed_warns_far_from_ring(cubic, crit):
    with pytest.warns(UserWarning):
        kernel_windowed(cubic, crit, 1000, 3.0, 3.0, 1.0)


def test_expected_count_zero_radius(cubic):
    assert expected_count(cubic, 100, 0.5, 0.0) == 0.0
    with pytest.raises(DomainError):
        expected_count(cubic, 100, 0.5, -1.0)


def test_expected_count_ginibre_oracle(ginibre):
    n, c, rad = 20, 0.5, 0.05

    def integrand(t, s):
        z = c + s * cmath.exp(1j * t)
        return ginibre_diag(n, abs(z)) * s / math.pi

    oracle, _ = integrate.dblquad(integrand, 0, rad, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-12)
    assert abs(expected_count(ginibre, n, c, rad) - oracle) < 1e-9 * oracle


def test_total_mass(ginibre, cubic):
    assert abs(total_mass(ginibre, 20) - 20) < 1e-8
    assert abs(total_mass(cubic, 300) - 300) < 1e-6


def test_diagonal_profile_at_origin(ginibre):
    prof = DiagonalProfile(ginibre, 10)
    assert abs(prof.density(0.0) - 10) < 1e-12
    np.testing.assert_allclose(prof.density([0.2, 0.6]), ginibre_diag(10, np.array([0.2, 0.6])),
                               rtol=1e-11)


def test_mean_level_spacing(cubic, crit):
    n = 500
    res = mean_level_spacing(cubic, crit, n)
    assert abs(res.count_at_s - 1.0) < 1e-8
    pred, literal = predicted_spacing(crit, n)
    assert res.predicted == pred and res.predicted_literal == literal
    assert abs(pred / literal - math.sqrt(math.pi)) < 1e-14
    assert 0.2 < res.s < 0.3


def test_double_scaling_reports(cubic, crit):
    res = double_scaling_error(cubic, crit, 1000, 0.0, 0.0)
    assert res.limit_modulus == pytest.approx(0.25 * 0.5274381913470515, rel=1e-7)
    assert res.abs_error == pytest.approx(abs(res.scaled_modulus - res.limit_modulus))
    assert res.rel_error < 0.5
