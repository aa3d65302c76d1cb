"""Droplet geometry, the tau <-> r_tau map, index windows and the
equilibrium functionals (weighted energy I_Q and entropy E_Q).

For a radial potential the equilibrium mass inside radius r is
F(r) = r q'(r)/2 on the droplet, so every quantity reduces to 1-D work on
[r0, r1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, InvalidPotentialError, NTooSmallError, NumericalError
from .potential import CriticalityData, RadialPotential, eval_derivative, radial_laplacian
from .quadrature import bisect_vectorized, gauss_legendre, panel_nodes, tanh_sinh


@dataclass(frozen=True)
class Droplet:
    r0: float
    r1: float
    kind: str
    mass_check: float


@dataclass(frozen=True)
class WindowBounds:
    n: int
    M: float
    j_star: float
    ell_minus: float
    ell_plus: float
    j_lo: int
    j_hi: int
    clamped: bool = False

    @property
    def indices(self) -> range:
        return range(self.j_lo, self.j_hi + 1)


def mass_function(pot: RadialPotential, r):
    """G(r) = r q'(r) / 2, the equilibrium mass inside radius r."""
    return 0.5 * np.asarray(r) * eval_derivative(pot, r, 1)


def droplet(pot: RadialPotential) -> Droplet:
    G = lambda r: 0.5 * r * eval_derivative(pot, r, 1)
    hi = 1.0
    for _ in range(200):
        if G(hi) >= 1.0:
            break
        hi *= 2.0
    else:
        raise NumericalError("no outer droplet edge found", last_r=hi)
    lo = hi / 2.0
    while lo > 1e-12 and G(lo) >= 1.0:
        lo /= 2.0
    try:
        r1 = optimize.brentq(lambda r: G(r) - 1.0, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    except ValueError as exc:
        raise NumericalError("no root of r q'(r) = 2 in bracket", lo=lo, hi=hi) from exc

    # inner edge: largest sign change of q' on (0, r1)
    grid = np.geomspace(1e-9 * r1, r1, 20001)
    qp = eval_derivative(pot, grid, 1)
    changes = np.flatnonzero(np.sign(qp[:-1]) != np.sign(qp[1:]))
    if changes.size == 0:
        if qp[0] < 0:
            raise InvalidPotentialError("q' < 0 on the whole candidate droplet")
        r0 = 0.0
    else:
        k = changes[-1]
        r0 = optimize.brentq(lambda r: eval_derivative(pot, r, 1), grid[k], grid[k + 1],
                             xtol=1e-15, rtol=1e-15)
    kind = "disk" if r0 == 0.0 else "annulus"

    inner = np.linspace(max(r0, grid[0]), r1, 4001)
    dG = 0.5 * inner * radial_laplacian(pot, inner, 0)
    floor = (1e-8 if pot.low_accuracy else 1e-10) * max(1.0, float(np.max(np.abs(dG))))
    if np.any(dG < -floor):
        raise InvalidPotentialError("r q'(r) is not monotone on the droplet "
                                    f"(r={float(inner[np.argmax(dG < -floor)]):.6g})")
    mass = G(r1) - (G(r0) if r0 > 0 else 0.0)
    return Droplet(r0=float(r0), r1=float(r1), kind=kind, mass_check=float(mass))


def r_of_tau(pot: RadialPotential, tau, drop: Droplet | None = None):
    """Solve r q'(r) = 2 tau for r in [r0, r1] (vectorised over tau)."""
    drop = drop or droplet(pot)
    tau_arr = np.asarray(tau, dtype=float)
    if np.any((tau_arr < 0) | (tau_arr > 1)):
        raise DomainError("tau must lie in [0, 1]")
    out = solve_mass(pot, tau_arr, drop.r0, drop.r1)
    return float(out) if np.ndim(tau) == 0 else out


def solve_mass(pot: RadialPotential, target, lo: float, hi: float):
    """Vectorised root of G(r) = target on [lo, hi]; endpoints map to themselves."""
    target = np.asarray(target, dtype=float)
    flat = np.atleast_1d(target).ravel()
    lo_arr = np.full(flat.shape, lo)
    hi_arr = np.full(flat.shape, hi)
    g_hi = 0.5 * hi * eval_derivative(pot, hi, 1)
    while np.any(g_hi < flat):
        hi = 2.0 * hi
        hi_arr = np.where(g_hi < flat, hi, hi_arr)
        g_hi = 0.5 * hi * eval_derivative(pot, hi, 1)
    # bisect in log r so tiny radii near a disk centre resolve to full precision
    lo_arr = np.log(np.maximum(lo_arr, 1e-200 * hi))

    def f(t):
        r = np.exp(t)
        return 0.5 * r * eval_derivative(pot, r, 1) - flat

    root = np.exp(bisect_vectorized(f, lo_arr, np.log(hi_arr), iterations=100))
    if lo == 0:
        root = np.where(flat <= 0, 0.0, root)
    else:
        root = np.where(flat <= 0, lo, root)
    return root.reshape(target.shape)


def p_map(pot: RadialPotential, crit: CriticalityData, x):
    """p(x) = G(r* + x) - tau*, the tau-offset for a radius offset x."""
    r = crit.r_star + np.asarray(x, dtype=float)
    if np.any(r <= 0):
        raise DomainError("p_map needs r* + x > 0")
    out = 0.5 * r * eval_derivative(pot, r, 1) - crit.tau_star
    return float(out) if np.ndim(x) == 0 else out


def window_bounds(pot: RadialPotential, crit: CriticalityData, n: int, M: float = 2.0,
                  strict: bool = False, drop: Droplet | None = None) -> WindowBounds:
    """Index window n*p([-d, d]) around j* with d = M log(n) n^(-1/(2m+2)).

    When ``r* - d`` leaves the droplet the lower offset is clamped to the
    inner edge (tau = 0) unless ``strict`` is set.
    """
    if n < 2 or M <= 0:
        raise DomainError("window needs n >= 2 and M > 0")
    drop = drop or droplet(pot)
    d = M * math.log(n) * n ** (-crit.scale_exponent)
    clamped = False
    lower = -d
    if crit.r_star - d <= max(drop.r0, 0.0):
        if strict:
            raise NTooSmallError("window leaves the droplet; increase n or decrease M",
                                 n=n, M=M, offset=d, r_star=crit.r_star)
        lower = max(drop.r0, 0.0) - crit.r_star
        clamped = True
    j_star = n * crit.tau_star
    ell_minus = -n * (p_map(pot, crit, lower) if crit.r_star + lower > 0 else -crit.tau_star)
    ell_plus = n * p_map(pot, crit, d)
    j_lo = max(0, math.floor(j_star - ell_minus))
    j_hi = min(n - 1, math.floor(j_star + ell_plus))
    return WindowBounds(n=n, M=M, j_star=j_star, ell_minus=float(ell_minus),
                        ell_plus=float(ell_plus), j_lo=j_lo, j_hi=j_hi, clamped=clamped)


# ---------------------------------------------------------------------------
# functionals


def _droplet_nodes(drop: Droplet, order: int = 24, n_panels: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL on [r0, r1], geometrically graded toward r = 0 for disks."""
    if drop.r0 == 0.0:
        graded = drop.r1 * 0.2 ** np.arange(16, 0, -1)
        edges = np.concatenate(([0.0], graded, np.linspace(graded[-1], drop.r1, n_panels + 1)[1:]))
    else:
        edges = np.linspace(drop.r0, drop.r1, n_panels + 1)
    return panel_nodes(edges, order)


def _density(pot: RadialPotential, r):
    """Radial equilibrium density dF/dr = r * Laplacian / 2."""
    return 0.5 * r * radial_laplacian(pot, r, 0)


def energy(pot: RadialPotential, drop: Droplet | None = None, method: str = "tensor",
           order: int = 24) -> float:
    """Weighted logarithmic energy I_Q of the equilibrium measure.

    Radial reduction: the circle average of log|z - w| is log max(|z|, |w|),
    so I_Q = -(double integral of log max(r, s)) + (integral of q).

    ``method="tensor"`` integrates the double integral on the triangle s < r
    with a tensor Gauss rule; ``method="reduced"`` uses the integrated-by-parts
    single integral log r1 - int F(r)^2 / r dr. The two are independent routes.
    """
    drop = drop or droplet(pot)
    r, w = _droplet_nodes(drop, order)
    nu = _density(pot, r)
    q = eval_derivative(pot, r, 0)
    potential_term = float(np.dot(w, q * nu))
    if method == "tensor":
        x, wx = gauss_legendre(order)
        # inner s in [r0, r] mapped through s = r0 + (r - r0) u
        s = drop.r0 + (r[:, None] - drop.r0) * x[None, :]
        inner = (r - drop.r0) * (_density(pot, np.maximum(s, 1e-300).ravel()).reshape(s.shape) @ wx)
        log_term = 2.0 * float(np.dot(w, nu * np.log(r) * inner))
    elif method == "reduced":
        F = 0.5 * r * eval_derivative(pot, r, 1)
        if drop.r0 > 0:
            F = F - 0.5 * drop.r0 * eval_derivative(pot, drop.r0, 1)
        log_term = math.log(drop.r1) - float(np.dot(w, F * F / r))
    else:
        raise ValueError(f"unknown energy method {method!r}")
    return -log_term + potential_term


def _interior_laplacian_min(pot: RadialPotential, drop: Droplet) -> float | None:
    lo = max(drop.r0, 1e-6 * drop.r1)
    grid = np.linspace(lo, drop.r1, 2001)
    lap = np.asarray(radial_laplacian(pot, grid, 0), dtype=float)
    i = int(np.argmin(lap))
    if i == 0 or i == grid.size - 1:
        return None
    res = optimize.minimize_scalar(lambda r: float(radial_laplacian(pot, r, 0)),
                                   bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                   options={"xatol": 1e-13})
    return float(res.x)


def entropy(pot: RadialPotential, drop: Droplet | None = None,
            crit: CriticalityData | None = None, method: str = "tanh-sinh") -> float:
    """E_Q = integral of log(Laplacian/4) against the equilibrium measure.

    The integrand r*Lap*log(Lap/4)/2 is split at r* (where Lap vanishes)
    and, for disks, carries an integrable log singularity at 0 when q'(0) != 0.
    """
    drop = drop or droplet(pot)

    def integrand(r):
        lap = np.asarray(radial_laplacian(pot, r, 0), dtype=float)
        out = np.zeros_like(lap)
        pos = lap > 0
        out[pos] = 0.5 * r[pos] * lap[pos] * np.log(lap[pos] / 4.0)
        return out

    breaks = [drop.r0]
    if crit is not None and drop.r0 < crit.r_star < drop.r1:
        breaks.append(crit.r_star)
    elif crit is None:
        # a near-zero interior minimum still produces a sharp log dip; split there too
        r_min = _interior_laplacian_min(pot, drop)
        if r_min is not None:
            breaks.append(r_min)
    breaks.append(drop.r1)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if method == "tanh-sinh":
            val, err = tanh_sinh(integrand, a, b, level=8)
            if err > 1e-9 * max(1.0, abs(val)):
                raise NumericalError("entropy quadrature did not settle", a=a, b=b, err=err)
        elif method == "adaptive":
            val, err = integrate.quad(lambda r: float(integrand(np.array([r]))[0]), a, b,
                                      epsabs=1e-13, epsrel=1e-12, limit=400)
        else:
            raise ValueError(f"unknown entropy method {method!r}")
        total += val
    return total
