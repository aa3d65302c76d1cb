import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringgas import build_from_laplacian_profile, builtin_cubic, droplet, energy, entropy, gaussian
from ringgas.equilibrium import p_map, r_of_tau, window_bounds
from ringgas.errors import DomainError, NTooSmallError
from ringgas.potential import eval_derivative

S3 = math.sqrt(3.0)


@pytest.fixture(scope="module")
def annulus():
    return build_from_laplacian_profile([2.0, -4.0, 2.0], inner_radius=0.2, base_slope=0.0)


def test_ginibre_droplet(ginibre):
    d = droplet(ginibre)
    assert d.kind == "disk" and d.r0 == 0.0
    assert abs(d.r1 - 1.0) < 1e-14


def test_cubic_droplet(cubic):
    d = droplet(cubic)
    assert d.kind == "disk" and d.r0 == 0.0
    assert 1.79 < d.r1 < 1.80
    assert abs(d.r1 ** 3 - S3 * d.r1 ** 2 + d.r1 - 2.0) < 1e-12


def test_annulus_droplet(annulus):
    d = droplet(annulus)
    assert d.kind == "annulus"
    assert abs(d.r0 - 0.2) < 1e-12
    assert abs(d.r0 * eval_derivative(annulus, d.r0, 1)) < 1e-10


@pytest.mark.parametrize("name", ["ginibre", "cubic", "quartic_ring"])
def test_edge_equations_and_mass(request, name):
    pot = request.getfixturevalue(name)
    d = droplet(pot)
    assert abs(d.r1 * eval_derivative(pot, d.r1, 1) - 2.0) < 1e-10
    assert abs(d.mass_check - 1.0) < 1e-9


def test_r_of_tau_special_values(cubic, crit):
    d = droplet(cubic)
    r = r_of_tau(cubic, crit.tau_star)
    # G'(r*) = 0, so r(tau) is a cube root at tau*: rounding in tau of size eps
    # moves r by (12 eps / (r* gamma))^(1/3); the residual is the sharp check
    assert abs(0.5 * r * eval_derivative(cubic, r, 1) - crit.tau_star) < 1e-16
    bound = 2 * (12 * 1e-16 / (crit.r_star * crit.gamma)) ** (1 / 3)
    assert abs(r - 1 / S3) < bound
    assert abs(r_of_tau(cubic, 1.0) - d.r1) < 1e-13
    assert r_of_tau(cubic, 0.0) == 0.0
    with pytest.raises(DomainError):
        r_of_tau(cubic, 1.5)


def test_r_of_tau_monotone(cubic, annulus):
    tau = np.linspace(0.0, 1.0, 100)
    for pot in (cubic, annulus):
        r = r_of_tau(pot, tau)
        assert np.all(np.diff(r) > 0)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_r_of_tau_cube_root_law(cubic, crit, sign):
    delta = 1e-6
    got = r_of_tau(cubic, crit.tau_star + sign * delta) - crit.r_star
    predicted = sign * (12.0 / (crit.r_star * crit.gamma)) ** (1 / 3) * delta ** (1 / 3)
    assert abs(got / predicted - 1.0) <= 0.05


def test_p_map(cubic, crit):
    assert p_map(cubic, crit, 0.0) == 0.0
    x = 1e-3
    assert abs(p_map(cubic, crit, x) / (crit.r_star * crit.gamma / 12 * x ** 3) - 1) < 0.01
    s = 1e-4
    back = p_map(cubic, crit, r_of_tau(cubic, crit.tau_star + s) - crit.r_star)
    assert abs(back - s) < 1e-10
    xs = np.linspace(-0.5, 1.0, 200)
    assert np.all(np.diff(p_map(cubic, crit, xs)) > 0)
    with pytest.raises(DomainError):
        p_map(cubic, crit, -1.0)


def test_window_bounds_large_n(cubic, crit):
    n, M = 10 ** 4, 1.0
    wb = window_bounds(cubic, crit, n, M)
    d = M * math.log(n) * n ** -0.25
    assert wb.ell_plus == pytest.approx(n * p_map(cubic, crit, d), rel=1e-14)
    assert 3.0e3 < wb.ell_plus < 4.5e3
    assert wb.j_hi == min(n - 1, math.floor(wb.j_star + wb.ell_plus))
    assert wb.j_lo == max(0, math.floor(wb.j_star - wb.ell_minus))
    # r* - d < 0 here, so the lower side is clamped to the disk centre
    assert wb.clamped and wb.j_lo == 0
    with pytest.raises(NTooSmallError):
        window_bounds(cubic, crit, n, M, strict=True)


def test_window_bounds_clamps_at_top(cubic, crit):
    wb = window_bounds(cubic, crit, 100, 2.0)
    assert wb.j_hi == 99


def test_window_fraction_shrinks(cubic, crit):
    fr = [len(window_bounds(cubic, crit, n, 0.5).indices) / n for n in (10 ** 4, 10 ** 6, 10 ** 8)]
    assert fr[0] > fr[1] > fr[2]


def test_energy_ginibre(ginibre):
    assert abs(energy(ginibre) - 0.75) < 1e-12
    assert abs(energy(ginibre, method="reduced") - 0.75) < 1e-12


def test_energy_shift(cubic):
    shifted = build_from_laplacian_profile([-2 * S3, 3.0], inverse_r=1.0, base_slope=1.0)
    # the profile builder fixes q(0) = 0 like the cubic family, so shift by hand
    base = energy(shifted)
    assert abs(base - energy(cubic)) < 1e-12
    from ringgas import custom

    plus = custom([lambda r: cubic(r) + 2.5] + [lambda r, k=k: cubic.derivative(r, k) for k in range(1, 7)])
    assert abs(energy(plus) - energy(cubic) - 2.5) < 1e-10


def test_energy_two_routes_agree(cubic, annulus, quartic_ring):
    for pot in (cubic, annulus, quartic_ring):
        assert abs(energy(pot) - energy(pot, method="reduced")) < 1e-9


def test_energy_regrid(cubic):
    assert abs(energy(cubic, order=24) - energy(cubic, order=40)) < 1e-10


def test_energy_cubic_monte_carlo(cubic):
    rng = np.random.default_rng(20240607)
    m = 2_000_000
    d = droplet(cubic)
    table = np.linspace(0.0, 1.0, 20001)
    r = np.interp(rng.random((2, m)), table, r_of_tau(cubic, table, d))
    ang = rng.random((2, m)) * 2 * np.pi
    z = r * np.exp(1j * ang)
    samples = -np.log(np.abs(z[0] - z[1])) + 0.5 * (cubic(r[0]) + cubic(r[1]))
    est, se = samples.mean(), samples.std() / math.sqrt(m)
    assert abs(est - energy(cubic)) < 4 * se
    assert abs(est - energy(cubic)) < 2e-3


def test_entropy_closed_forms(ginibre):
    assert abs(entropy(ginibre)) < 1e-13
    assert abs(entropy(gaussian(2.0)) - math.log(2.0)) < 1e-12


def test_entropy_cubic_two_schemes(cubic, crit):
    a = entropy(cubic, crit=crit)
    b = entropy(cubic, crit=crit, method="adaptive")
    assert math.isfinite(a)
    assert abs(a - b) < 1e-6


def test_entropy_without_ring_information():
    near = builtin_cubic(1.7320508, 1.0)
    assert abs(entropy(near) - entropy(builtin_cubic(S3, 1.0))) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.2, max_value=5.0))
def test_gaussian_family_properties(a):
    pot = gaussian(a)
    d = droplet(pot)
    assert abs(d.r1 - 1 / math.sqrt(a)) < 1e-12
    # I_Q for q = a r^2: 3/4 + log(a)/2; E_Q = log(a)
    assert abs(energy(pot) - (0.75 + 0.5 * math.log(a))) < 1e-10
    assert abs(entropy(pot) - math.log(a)) < 1e-10
