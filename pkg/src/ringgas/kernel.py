"""Finite-n correlation kernel of the radial ensemble.

K_n(z1, z2) = sum_j (z1 conj z2)^j exp(-n (q(|z1|) + q(|z2|))/2) / (2 u_j)

with points distributed according to K_n(z, z) dA / pi, so that the
integral of the diagonal over the plane is exactly n. Only moduli are
gauge invariant; the phase is reported for completeness.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import backend
from .equilibrium import WindowBounds, droplet, window_bounds
from .errors import DomainError, NumericalError
from .norms import NormTable, log_norm_table
from .potential import CriticalityData, RadialPotential, eval_derivative
from .quadrature import gauss_legendre, panel_nodes
from .universal import k_star, rho


@dataclass(frozen=True)
class KernelValue:
    modulus: float
    phase: float
    log_modulus: float
    n: int
    z1: complex
    z2: complex
    truncated: bool = False
    window: WindowBounds | None = None


def _q_at(pot: RadialPotential, r: np.ndarray) -> np.ndarray:
    """q(r) allowing r = 0 for potentials that are smooth at the origin."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    pos = r > 0
    if np.any(pos):
        out[pos] = eval_derivative(pot, r[pos], 0)
    if np.any(~pos):
        if pot.poly is None or pot.log_coef != 0.0:
            raise DomainError("this potential is not defined at r = 0")
        out[~pos] = float(pot.poly(0.0))
    return out


def _coefficients(table: NormTable, js: np.ndarray) -> np.ndarray:
    """log of 1/||p_j||^2 = 1/(2 u_j)."""
    return -math.log(2.0) - table.log_u_for(js)


def _kernel_sum(pot: RadialPotential, n: int, z1: complex, z2: complex, table: NormTable,
                js: np.ndarray, truncated: bool, window: WindowBounds | None) -> KernelValue:
    z1, z2 = complex(z1), complex(z2)
    if js.size == 0:
        raise NumericalError("empty index range for the kernel sum", n=n)
    r1, r2 = abs(z1), abs(z2)
    s = (math.log(r1) if r1 > 0 else -math.inf) + (math.log(r2) if r2 > 0 else -math.inf)
    phi = cmath.phase(z1) - cmath.phase(z2)
    log_s, arg = backend.power_sum(_coefficients(table, js), js.astype(float), s, phi)
    log_mod = log_s - 0.5 * n * float(np.sum(_q_at(pot, np.array([r1, r2]))))
    if z1 == z2:
        arg = 0.0
    return KernelValue(modulus=math.exp(log_mod), phase=arg, log_modulus=log_mod, n=n, z1=z1,
                       z2=z2, truncated=truncated, window=window)


def kernel_full(pot: RadialPotential, n: int, z1: complex, z2: complex,
                table: NormTable | None = None) -> KernelValue:
    table = table if table is not None else log_norm_table(pot, n)
    js = np.arange(n)
    if not table.covers(js):
        raise NumericalError("norm table does not cover j = 0..n-1", n=n)
    return _kernel_sum(pot, n, z1, z2, table, js, False, None)


def kernel_windowed(pot: RadialPotential, crit: CriticalityData, n: int, z1: complex, z2: complex,
                    M: float = 2.0, table: NormTable | None = None) -> KernelValue:
    """Kernel sum restricted to the critical index window."""
    win = window_bounds(pot, crit, n, M)
    reach = math.log(n) * n ** -0.25
    if max(abs(abs(z1) - crit.r_star), abs(abs(z2) - crit.r_star)) > reach:
        warnings.warn("points are farther than log(n) n^(-1/4) from the critical ring; "
                      "the truncation error is not controlled there", stacklevel=2)
    js = np.arange(win.j_lo, win.j_hi + 1)
    if table is None or not table.covers(js):
        table = log_norm_table(pot, n, js)
    return _kernel_sum(pot, n, z1, z2, table, js, True, win)


# ---------------------------------------------------------------------------
# diagonal


class DiagonalProfile:
    """log K_n(r, r) as a function of the radius, sharing one set of coefficients."""

    def __init__(self, pot: RadialPotential, n: int, table: NormTable | None = None,
                 js: np.ndarray | None = None):
        self.pot = pot
        self.n = n
        self.js = np.arange(n) if js is None else np.asarray(js)
        table = table if table is not None and table.covers(self.js) else log_norm_table(pot, n, self.js)
        self._log_c = _coefficients(table, self.js)
        self._jf = self.js.astype(float)

    def log_density(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        out = np.empty(flat.shape)
        pos = flat > 0
        if np.any(pos):
            lr = np.log(flat[pos])
            out[pos] = backend.diag_profile(self._log_c, self._jf, lr) - self.n * _q_at(self.pot, flat[pos])
        if np.any(~pos):
            zero = self.js == 0
            val = float(self._log_c[zero][0]) if np.any(zero) else -math.inf
            out[~pos] = val - self.n * _q_at(self.pot, np.zeros(int(np.sum(~pos))))
        return out.reshape(r.shape)

    def density(self, r) -> np.ndarray:
        return np.exp(self.log_density(r))


def expected_count(pot: RadialPotential, n: int, center: complex, radius: float,
                   table: NormTable | None = None, profile: DiagonalProfile | None = None,
                   order: int = 40, n_phi: int = 96) -> float:
    """E[#points in D(center, radius)] = int_D K_n(z, z) dA / pi.

    Polar coordinates about the centre: Gauss in the radial variable and the
    trapezoid rule (spectrally accurate for periodic integrands) in angle.
    """
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    if radius == 0:
        return 0.0
    profile = profile or DiagonalProfile(pot, n, table)
    x, w = gauss_legendre(order)
    rho_nodes = radius * x
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    z = complex(center) + rho_nodes[:, None] * np.exp(1j * phis)[None, :]
    dens = profile.density(np.abs(z))
    angular = dens.mean(axis=1) * 2 * math.pi
    return float(radius * np.dot(w, angular * rho_nodes)) / math.pi


def total_mass(pot: RadialPotential, n: int, table: NormTable | None = None,
               r_max: float | None = None, panels: int = 64, order: int = 24) -> float:
    """int_C K_n(z, z) dA / pi via the radial profile (equals n)."""
    profile = DiagonalProfile(pot, n, table)
    r_max = r_max or 3.0 * droplet(pot).r1
    nodes, weights = panel_nodes(np.linspace(0.0, r_max, panels + 1), order)
    return float(np.dot(weights, 2.0 * nodes * profile.density(nodes)))


@dataclass(frozen=True)
class SpacingResult:
    n: int
    s: float
    predicted: float
    predicted_literal: float
    count_at_s: float


def predicted_spacing(crit: CriticalityData, n: int) -> tuple[float, float]:
    """(2/sqrt(rho(0)), 2/sqrt(pi rho(0))) times (gamma n)^(-1/4).

    The first form matches the dA/pi normalisation used for counts here; the
    second is the dA form and is reported for comparison.
    """
    r0 = rho(1, 0.0)
    scale = (crit.gamma * n) ** -0.25
    return 2.0 / math.sqrt(r0) * scale, 2.0 / math.sqrt(math.pi * r0) * scale


def mean_level_spacing(pot: RadialPotential, crit: CriticalityData, n: int,
                       table: NormTable | None = None, xtol: float = 1e-10) -> SpacingResult:
    """Radius s with E[N(D(r*, s))] = 1."""
    if crit.m != 1:
        raise DomainError("mean level spacing is implemented for m = 1")
    profile = DiagonalProfile(pot, n, table)
    guess, literal = predicted_spacing(crit, n)
    f = lambda s: expected_count(pot, n, crit.r_star, s, profile=profile) - 1.0
    lo, hi = 0.25 * guess, 2.0 * guess
    for _ in range(60):
        if f(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError("could not bracket the mean level spacing", n=n, hi=hi)
    while f(lo) > 0:
        lo *= 0.5
    s = optimize.brentq(f, lo, hi, xtol=xtol, rtol=1e-14)
    return SpacingResult(n=n, s=s, predicted=guess, predicted_literal=literal,
                         count_at_s=f(s) + 1.0)


# ---------------------------------------------------------------------------
# double scaling


@dataclass(frozen=True)
class DoubleScalingResult:
    n: int
    xi1: complex
    xi2: complex
    scaled_modulus: float
    limit_modulus: float
    abs_error: float
    rel_error: float


def double_scaling_error(pot: RadialPotential, crit: CriticalityData, n: int, xi1: complex,
                         xi2: complex, M: float = 2.0, windowed: bool = True,
                         table: NormTable | None = None) -> DoubleScalingResult:
    """| |K_n(z1, z2)|/sqrt(gamma n) - |K_*(xi1, xi2)|/4 | at z_k = r* + xi_k (gamma n)^(-1/4)."""
    if crit.m != 1:
        raise DomainError("the double-scaling comparison is implemented for m = 1")
    scale = (crit.gamma * n) ** -0.25
    z1 = crit.r_star + complex(xi1) * scale
    z2 = crit.r_star + complex(xi2) * scale
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        kv = (kernel_windowed(pot, crit, n, z1, z2, M, table) if windowed
              else kernel_full(pot, n, z1, z2, table))
    lhs = kv.modulus / math.sqrt(crit.gamma * n)
    rhs = 0.25 * abs(k_star(1, complex(xi1), complex(xi2)))
    err = abs(lhs - rhs)
    return DoubleScalingResult(n, complex(xi1), complex(xi2), lhs, rhs, err, err / rhs)
