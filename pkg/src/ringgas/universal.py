"""Potential-independent limit objects.

P_m(y) = sum_{k=2}^{2m+2} y^k / ((2m+2-k)! k!) is a positive polynomial with a
unique zero at y = 0; the Pearcey-type integral is
pearcey(m, theta) = int exp(-theta P_m(y)) dy. From these we build f_1, the
universal constant C_m, the limiting kernel K_*^(m) and rho^(m).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import bisect_vectorized, gauss_legendre, panel_nodes

# exp(-CUTOFF) is far below double precision relative to the peak value 1
CUTOFF = 60.0
MAX_M = 4
TINY_THETA = 1e-80


def _coeffs(m: int) -> np.ndarray:
    """Ascending coefficients of P_m."""
    deg = 2 * m + 2
    c = np.zeros(deg + 1)
    for k in range(2, deg + 1):
        c[k] = 1.0 / (math.factorial(deg - k) * math.factorial(k))
    return c


def p_poly(m: int, y):
    return np.polynomial.polynomial.polyval(y, _coeffs(m))


def homogeneous_exponent(m: int, y, x):
    """x^(2m+2) P_m(y/x - 1) written so that x = 0 is harmless."""
    deg = 2 * m + 2
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return (y ** deg - deg * y * x ** (deg - 1) + (deg - 1) * x ** deg) / math.factorial(deg)


def _check_m(m: int) -> None:
    if not (1 <= m <= MAX_M):
        raise ValueError(f"criticality order m must be in 1..{MAX_M}, got {m}")


def pearcey(m: int, theta, order: int = 64):
    """Vectorised int exp(-theta P_m(y)) dy for theta > 0.

    The integrand is unimodal with its peak at y = 0; on each side the
    range is cut where theta*P_m = CUTOFF and a Gauss rule of ``order``
    nodes per side is applied.
    """
    _check_m(m)
    th = np.asarray(theta, dtype=float)
    if np.any(~(th > 0)):
        raise ValueError("pearcey needs theta > 0")
    flat = th.ravel()
    coeffs = _coeffs(m)
    deg = 2 * m + 2
    tiny = flat < TINY_THETA
    if np.any(tiny):
        # the pure-power tail dominates; relative error ~ theta^(1/deg)
        out = np.empty_like(flat)
        out[tiny] = pearcey_small_theta_limit(m) * flat[tiny] ** (-1.0 / deg)
        if np.any(~tiny):
            out[~tiny] = pearcey(m, flat[~tiny], order)
        out = out.reshape(th.shape)
        return float(out) if out.ndim == 0 else out
    # start from the smaller of the quadratic/leading-term estimates, grow until bracketed
    guess = np.minimum((CUTOFF / (flat * coeffs[deg])) ** (1.0 / deg),
                       np.sqrt(CUTOFF / (flat * coeffs[2])))
    x, w = gauss_legendre(order)
    total = np.zeros_like(flat)

    def f(y):
        return flat * np.polynomial.polynomial.polyval(y, coeffs) - CUTOFF

    for sign in (-1.0, 1.0):
        span = sign * guess
        while np.any(short := f(span) < 0):
            span = np.where(short, 2.0 * span, span)
        edge = bisect_vectorized(f, np.zeros_like(flat), span, iterations=60)
        nodes = edge[:, None] * x[None, :]
        vals = np.exp(-flat[:, None] * np.polynomial.polynomial.polyval(nodes, coeffs))
        total += np.abs(edge) * (vals @ w)
    out = total.reshape(th.shape)
    return float(out) if out.ndim == 0 else out


def pearcey_small_theta_limit(m: int) -> float:
    """lim theta^(1/(2m+2)) * pearcey(m, theta) as theta -> 0."""
    deg = 2 * m + 2
    a = 1.0 / math.factorial(deg)
    return 2.0 * math.gamma(1.0 + 1.0 / deg) * a ** (-1.0 / deg)


def f1(gamma: float, x, m: int = 1):
    """f_1(x) = int exp(-gamma sum_k x^(2m+2-k) y^k / ((2m+2-k)! k!)) dy.

    The substitution y -> x y turns this into |x| * pearcey(m, gamma x^(2m+2));
    at x = 0 it is the pure-power integral, evaluated in closed form.
    """
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    zero = flat == 0
    if np.any(zero):
        out[zero] = pearcey_small_theta_limit(m) * gamma ** (-1.0 / (2 * m + 2))
    nz = ~zero
    if np.any(nz):
        out[nz] = np.abs(flat[nz]) * pearcey(m, gamma * flat[nz] ** (2 * m + 2))
    out = out.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def f1_direct(gamma: float, x: float, m: int = 1) -> float:
    """Direct quadrature of f_1 without the rescaling trick (oracle route)."""
    from scipy import integrate

    deg = 2 * m + 2
    ks = range(2, deg + 1)
    c = [1.0 / (math.factorial(deg - k) * math.factorial(k)) for k in ks]

    def integrand(y):
        return math.exp(-gamma * sum(ci * x ** (deg - k) * y ** k for ci, k in zip(c, ks)))

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def h1(gamma: float, x, m: int = 1):
    """sqrt(gamma/(2 pi (2m)!)) |x|^m f_1(x); for m = 1 this is sqrt(gamma/4pi)|x| f_1."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(gamma / (2 * np.pi * math.factorial(2 * m))) * np.abs(x) ** m * f1(gamma, x, m)


# ---------------------------------------------------------------------------
# universal constant


def _constant_integrand(m: int, x: np.ndarray) -> np.ndarray:
    """x^(2m) log(|x|^(m+1) pearcey_m(x^(2m+2)) / sqrt(2 pi (2m)!))."""
    deg = 2 * m + 2
    norm = math.sqrt(2 * math.pi * math.factorial(2 * m))
    val = np.abs(x) ** (m + 1) * pearcey(m, x ** deg) / norm
    return x ** (2 * m) * np.log(val)


@dataclass(frozen=True)
class ConstantResult:
    value: float
    tail: float
    cutoff: float
    error_estimate: float


@lru_cache(maxsize=None)
def universal_constant_detail(m: int = 1, cutoff: float = 200.0, order: int = 32,
                              panels_per_unit: float = 2.0) -> ConstantResult:
    """C_m = 2 * int_0^inf x^(2m) log(|x|^(m+1) P_m(x^(2m+2)) / sqrt(2 pi (2m)!)) dx.

    The integrand decays like c/x^2; beyond ``cutoff`` the tail c/X is added
    with c read off the integrand at X (for m = 1, c = 7/6 exactly).
    """
    _check_m(m)
    # geometric grading toward the log singularity at 0
    graded = 0.3 ** np.arange(30, 0, -1)
    body = np.linspace(1.0, 8.0, int(14 * panels_per_unit) + 1)
    far = np.geomspace(8.0, cutoff, int(40 * panels_per_unit) + 1)
    edges = np.unique(np.concatenate(([0.0], graded, body, far)))
    nodes, weights = panel_nodes(edges, order)
    body_val = 2.0 * float(np.dot(weights, _constant_integrand(m, nodes)))
    c_tail = float(_constant_integrand(m, np.array([cutoff]))[0]) * cutoff ** 2
    tail = 2.0 * c_tail / cutoff
    if m == 1:
        err = 2.0 * abs(c_tail - 7.0 / 6.0) / cutoff
    else:
        c_half = float(_constant_integrand(m, np.array([cutoff / 2]))[0]) * (cutoff / 2) ** 2
        err = 2.0 * abs(c_tail - c_half) / cutoff
    return ConstantResult(value=body_val + tail, tail=tail, cutoff=cutoff, error_estimate=err)


def universal_constant(m: int = 1) -> float:
    return universal_constant_detail(m).value


# ---------------------------------------------------------------------------
# limiting kernel


@dataclass(frozen=True)
class KStarValue:
    value: complex
    error_estimate: float
    degraded: bool


def _kstar_integral(m: int, xi1: complex, xi2: complex, h: float, order: int = 16) -> tuple[complex, float]:
    deg = 2 * m + 2
    y1, y2 = xi1.real, xi2.real
    dim = (xi1 - xi2).imag
    reach = max(abs(y1), abs(y2))
    X = reach + (math.factorial(deg) * 2 * 40.0 / (deg - 1)) ** (1.0 / deg) + 1.0
    n_panels = max(8, int(math.ceil(2 * X / h)))
    edges = np.linspace(-X, X, n_panels + 1)
    # keep x = 0 off the node set and on a panel edge; drop rounding slivers next to it
    edges = edges[np.abs(edges) > 1e-9 * X]
    edges = np.unique(np.concatenate((edges, [0.0])))
    nodes, weights = panel_nodes(edges, order)
    expo = 0.5 * (homogeneous_exponent(m, y1, nodes) + homogeneous_exponent(m, y2, nodes))
    env = np.exp(-expo) * np.abs(nodes) ** (2 * m - 1) / pearcey(m, nodes ** deg)
    phase = dim * nodes ** (2 * m + 1) / (2 * math.factorial(2 * m + 1))
    vals = env * np.exp(1j * phase)
    edge_env = float(np.max(np.exp(-0.5 * (homogeneous_exponent(m, y1, np.array([-X, X]))
                                         + homogeneous_exponent(m, y2, np.array([-X, X]))))))
    return complex(np.dot(weights, vals)) / math.factorial(2 * m), edge_env


def k_star_detail(m: int, xi1: complex, xi2: complex, rtol: float = 1e-9) -> KStarValue:
    """K_*^(m)(xi1, xi2) with a mesh-halving error estimate."""
    _check_m(m)
    xi1, xi2 = complex(xi1), complex(xi2)
    reach = max(abs(xi1.real), abs(xi2.real))
    osc = abs((xi1 - xi2).imag)
    h = min(0.25, 0.5 / (1.0 + reach), 1.0 / (1.0 + osc) ** 0.5)
    coarse, _ = _kstar_integral(m, xi1, xi2, 2 * h)
    fine, _ = _kstar_integral(m, xi1, xi2, h)
    err = abs(fine - coarse)
    degraded = err > max(rtol * abs(fine), 1e-14)
    if degraded:
        finer, _ = _kstar_integral(m, xi1, xi2, h / 2)
        err = abs(finer - fine)
        fine = finer
        degraded = err > max(1e-7 * abs(fine), 1e-14)
    return KStarValue(fine, err, degraded)


def k_star(m: int, xi1: complex, xi2: complex) -> complex:
    return k_star_detail(m, xi1, xi2).value


def rho(m: int, xi) -> float:
    """rho^(m)(xi) = K_*^(m)(xi, xi); real and dependent on Re(xi) only."""
    return k_star_detail(m, complex(xi).real, complex(xi).real).value.real
