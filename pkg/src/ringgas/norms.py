"""Norms u_j = int_0^inf r^(2j+1) exp(-n q(r)) dr and their asymptotics.

Everything is computed as log u_j. The exact route substitutes r = e^t so the
integrand becomes exp(phi(t)) with phi(t) = (2j+2) t - n q(e^t), a smooth
unimodal function peaked where r q'(r) = 2(j+1)/n. The integral is taken
after shifting by phi at the peak, so exp(-n q) is never formed on its own.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln, zeta

from .equilibrium import Droplet, droplet, solve_mass, window_bounds
from .errors import ConfigError, DomainError, NumericalError, RegimeInapplicableError, UnsupportedOrderError
from .potential import CriticalityData, RadialPotential, eval_derivative, radial_laplacian
from .quadrature import bisect_vectorized, gauss_legendre
from .universal import f1

REGIMES = ("exact", "bulk", "critical", "origin")


@dataclass(frozen=True)
class NormEntry:
    j: int
    n: int
    log_u: float
    regime: str
    x: float
    r_tau: float
    err_est: float


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls the exact norm quadrature.

    The integration range is cut where the integrand falls to ``abs_floor``
    times its peak value. ``panels`` and ``order`` describe the
    composite Gauss rule used on each side of the peak; the error estimate
    compares against a rule with ``coarse_order`` nodes per panel.
    """

    rel_tol: float = 1e-10
    abs_floor: float = 1e-18
    panels: int = 6
    order: int = 24
    coarse_order: int = 16
    max_subdivisions: int = 60

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-6):
            raise ConfigError("rel_tol must lie in (0, 1e-6]")
        if not (0 < self.abs_floor < 1):
            raise ConfigError("abs_floor must lie in (0, 1)")
        if self.coarse_order >= self.order:
            raise ConfigError("coarse_order must be below order")

    @property
    def log_drop(self) -> float:
        return -math.log(self.abs_floor)

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol, self.abs_floor, 2 * self.panels, self.order,
                              self.coarse_order, self.max_subdivisions)


DEFAULT_SPEC = QuadratureSpec()


@dataclass
class NormTable:
    """Columnar table of norms for one n (arrays indexed by position, sorted by j)."""

    n: int
    j: np.ndarray
    log_u: np.ndarray
    regime: np.ndarray
    r_tau: np.ndarray
    x: np.ndarray
    err_est: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {int(jj): i for i, jj in enumerate(self.j)}

    def __len__(self) -> int:
        return len(self.j)

    def entry(self, j: int) -> NormEntry:
        i = self._index[j]
        return NormEntry(int(self.j[i]), self.n, float(self.log_u[i]), str(self.regime[i]),
                         float(self.x[i]), float(self.r_tau[i]), float(self.err_est[i]))

    def log_u_for(self, js: np.ndarray) -> np.ndarray:
        try:
            idx = np.fromiter((self._index[int(k)] for k in js), dtype=np.intp, count=len(js))
        except KeyError as exc:
            raise KeyError(f"norm table for n={self.n} has no entry j={exc.args[0]}") from None
        return self.log_u[idx]

    def covers(self, js) -> bool:
        return all(int(k) in self._index for k in js)

    def __iter__(self):
        for jj in self.j:
            yield self.entry(int(jj))


# ---------------------------------------------------------------------------
# exact


def _phi(pot: RadialPotential, t: np.ndarray, a: np.ndarray, n: int) -> np.ndarray:
    """(2j+2) t - n q(e^t) with a = 2j + 2 broadcast against t."""
    return a * t - n * eval_derivative(pot, np.exp(t), 0)


def _peak(pot: RadialPotential, js: np.ndarray, n: int, drop: Droplet) -> np.ndarray:
    """Radius maximising r^(2j+1) exp(-n q): r q'(r) = 2 (j+1)/n."""
    return solve_mass(pot, (js + 1.0) / n, max(drop.r0, 0.0), drop.r1)


def _cut_points(pot, t0, a, n, phi0, log_drop, side: float, guess):
    """Offsets s > 0 with phi(t0 + side*s) = phi0 - log_drop."""
    def excess(s):
        return (phi0 - _phi(pot, t0 + side * s, a, n)) - log_drop

    span = np.array(guess, dtype=float)
    for _ in range(200):
        short = excess(span) < 0
        if not np.any(short):
            break
        span = np.where(short, 2.0 * span, span)
    else:
        raise NumericalError("could not bracket the norm integrand tail", side=side)
    return bisect_vectorized(excess, np.zeros_like(span), span, iterations=55)


def _side_integral(pot, t0, a, n, phi0, width, side, panels, order):
    x, w = gauss_legendre(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    lo = edges[:-1, None] * 1.0
    h = np.diff(edges)[:, None]
    u = (lo + h * x).ravel()                      # nodes on [0, 1]
    wu = (h * w).ravel()
    t = t0[:, None] + side * width[:, None] * u[None, :]
    vals = np.exp(_phi(pot, t, a[:, None], n) - phi0[:, None])
    return width * (vals @ wu)


def _exact_block(pot: RadialPotential, js: np.ndarray, n: int, drop: Droplet,
                 spec: QuadratureSpec):
    js = np.asarray(js, dtype=float)
    a = 2.0 * js + 2.0
    r0 = _peak(pot, js, n, drop)
    if np.any(r0 <= 0):
        raise NumericalError("norm integrand peak collapsed to r = 0", n=n,
                             j=int(js[np.argmax(r0 <= 0)]))
    t0 = np.log(r0)
    phi0 = _phi(pot, t0, a, n)
    # curvature-based initial guess for the cut (phi'' = -n r^2 Lap)
    curv = n * r0 ** 2 * np.abs(radial_laplacian(pot, r0, 0))
    guess = np.sqrt(2.0 * spec.log_drop / (curv + math.sqrt(n)))
    left = _cut_points(pot, t0, a, n, phi0, spec.log_drop, -1.0, guess)
    right = _cut_points(pot, t0, a, n, phi0, spec.log_drop, 1.0, guess)

    def total(panels, order):
        return (_side_integral(pot, t0, a, n, phi0, left, -1.0, panels, order)
                + _side_integral(pot, t0, a, n, phi0, right, 1.0, panels, order))

    fine = total(spec.panels, spec.order)
    coarse = total(spec.panels, spec.coarse_order)
    err = np.abs(fine - coarse) / fine
    panels = spec.panels
    bad = err > spec.rel_tol
    while np.any(bad):
        panels *= 2
        if panels > spec.max_subdivisions * spec.panels:
            k = int(np.argmax(bad))
            raise NumericalError("exact norm quadrature did not converge", n=n, j=int(js[k]),
                                 r=float(r0[k]), rel_err=float(err[k]))
        idx = np.flatnonzero(bad)
        sub = lambda order: (
            _side_integral(pot, t0[idx], a[idx], n, phi0[idx], left[idx], -1.0, panels, order)
            + _side_integral(pot, t0[idx], a[idx], n, phi0[idx], right[idx], 1.0, panels, order))
        f2, c2 = sub(spec.order), sub(spec.coarse_order)
        fine[idx] = f2
        err[idx] = np.abs(f2 - c2) / f2
        bad = err > spec.rel_tol
    # the window cut itself drops at most ~ abs_floor relative mass
    err = err + spec.abs_floor
    return phi0 + np.log(fine), err


def _tau_radius(pot: RadialPotential, js: np.ndarray, n: int, drop: Droplet) -> np.ndarray:
    """r_tau for tau = j/n (the saddle of V_tau = q - 2 tau log r)."""
    return solve_mass(pot, np.asarray(js, dtype=float) / n, max(drop.r0, 0.0), drop.r1)


def log_norm_table(pot: RadialPotential, n: int, js: Sequence[int] | None = None,
                   spec: QuadratureSpec = DEFAULT_SPEC, crit: CriticalityData | None = None,
                   drop: Droplet | None = None, threads: int = 1, chunk: int = 2048) -> NormTable:
    """Exact log u_j for all requested j (default 0..n-1)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    drop = drop or droplet(pot)
    js = np.arange(n) if js is None else np.unique(np.asarray(js, dtype=int))
    if js.size and js[0] < 0:
        raise DomainError("j must be >= 0")
    blocks = [js[i:i + chunk] for i in range(0, len(js), chunk)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _exact_block(pot, b, n, drop, spec), blocks))
    else:
        parts = [_exact_block(pot, b, n, drop, spec) for b in blocks]
    log_u = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    err = np.concatenate([p[1] for p in parts]) if parts else np.empty(0)
    r_tau = _tau_radius(pot, js, n, drop) if js.size else np.empty(0)
    x = n ** 0.25 * (r_tau - crit.r_star) if crit is not None else np.full(js.shape, np.nan)
    return NormTable(n=n, j=js, log_u=log_u, regime=np.full(js.shape, "exact", dtype=object),
                     r_tau=r_tau, x=x, err_est=err)


def log_norm_exact(pot: RadialPotential, j: int, n: int, spec: QuadratureSpec = DEFAULT_SPEC,
                   crit: CriticalityData | None = None, drop: Droplet | None = None) -> NormEntry:
    return log_norm_table(pot, n, [j], spec, crit, drop).entry(j)


# ---------------------------------------------------------------------------
# asymptotic regimes


def _v_tau(pot: RadialPotential, r, tau):
    return eval_derivative(pot, r, 0) - 2.0 * tau * np.log(r)


def _x_of(crit: CriticalityData | None, r, n: int):
    return n ** 0.25 * (r - crit.r_star) if crit is not None else np.full(np.shape(r), np.nan)


def _bulk_arrays(pot, crit, js, n, drop):
    """Vectorised bulk values; returns (log_u, r, err, ok) with ok False where inapplicable."""
    tau = js / n
    r = _tau_radius(pot, js, n, drop)
    ok = r > 0
    rs = np.where(ok, r, 1.0)
    v2 = np.asarray(radial_laplacian(pot, rs, 0), dtype=float)
    ok &= v2 > 0
    v2s = np.where(ok, v2, 1.0)
    log_u = -n * _v_tau(pot, rs, tau) + 0.5 * np.log(2 * np.pi / (n * v2s)) + np.log(rs)
    return log_u, r, 1.0 / (n * v2s * rs * rs), ok


def _critical_arrays(pot, crit, js, n, drop):
    tau = js / n
    r = _tau_radius(pot, js, n, drop)
    ok = r > 0
    rs = np.where(ok, r, 1.0)
    x = n ** 0.25 * (rs - crit.r_star)
    log_u = -n * _v_tau(pot, rs, tau) + np.log(rs) - 0.25 * math.log(n) + np.log(f1(crit.gamma, x))
    return log_u, r, np.full(r.shape, n ** -0.25), ok


def log_norm_bulk_asym(pot: RadialPotential, crit: CriticalityData | None, j: int, n: int,
                       drop: Droplet | None = None) -> NormEntry:
    """Laplace's method at r_tau; V_tau''(r_tau) equals the Laplacian there."""
    drop = drop or droplet(pot)
    log_u, r, err, ok = _bulk_arrays(pot, crit, np.array([float(j)]), n, drop)
    if not ok[0]:
        raise RegimeInapplicableError("no nondegenerate interior saddle; Laplace's method does not apply",
                                      j=j, n=n, r=float(r[0]))
    return NormEntry(j, n, float(log_u[0]), "bulk", float(_x_of(crit, r, n)[0]), float(r[0]),
                     float(err[0]))


def log_norm_critical_asym(pot: RadialPotential, crit: CriticalityData, j: int, n: int,
                           drop: Droplet | None = None) -> NormEntry:
    if crit.m != 1:
        raise UnsupportedOrderError("the critical norm asymptotic is only available for m = 1")
    drop = drop or droplet(pot)
    log_u, r, err, ok = _critical_arrays(pot, crit, np.array([float(j)]), n, drop)
    if not ok[0]:
        raise RegimeInapplicableError("saddle sits at r = 0; no critical Laplace expansion",
                                      j=j, n=n)
    return NormEntry(j, n, float(log_u[0]), "critical", float(_x_of(crit, r, n)[0]), float(r[0]),
                     float(err[0]))


def origin_applicable(pot: RadialPotential, tol: float = 1e-12) -> tuple[bool, str]:
    if pot.poly is None or pot.log_coef != 0.0:
        return False, "needs a potential that is smooth at r = 0"
    d1 = float(pot.poly.deriv(1)(0.0))
    d2 = float(pot.poly.deriv(2)(0.0))
    if abs(d1) > tol:
        return False, f"q'(0) = {d1:g} is not zero"
    if d2 <= 0:
        return False, f"q''(0) = {d2:g} is not positive"
    return True, ""


def _origin_arrays(pot, js, n):
    q0 = float(pot.poly(0.0))
    q2 = float(pot.poly.deriv(2)(0.0))
    log_2u = -n * q0 - (js + 1) * math.log(n * q2 / 2.0) + gammaln(js + 1)
    err = (js + 1) ** 1.5 * math.log(n) ** 3 / math.sqrt(n)
    return log_2u - math.log(2.0), err


def log_norm_origin_asym(pot: RadialPotential, j: int, n: int) -> NormEntry:
    """log(2 u_j) ~ -n q(0) - (j+1) log(n q''(0)/2) + log j!, returned as log u_j."""
    ok, why = origin_applicable(pot)
    if not ok:
        raise RegimeInapplicableError("origin regime inapplicable: " + why, j=j, n=n)
    log_u, err = _origin_arrays(pot, np.array([float(j)]), n)
    return NormEntry(j, n, float(log_u[0]), "origin", math.nan, math.nan, float(err[0]))


def log_norm_auto_table(pot: RadialPotential, crit: CriticalityData | None, n: int,
                        js: Sequence[int] | None = None, M: float = 2.0,
                        drop: Droplet | None = None, origin_exponent: float = 0.19) -> NormTable:
    """Piecewise asymptotic table: origin near j = 0, critical in the window, bulk elsewhere.

    Indices where no asymptotic regime applies (a saddle at r = 0 without
    the origin regime) fall back to the exact value and are tagged so.
    """
    drop = drop or droplet(pot)
    js = np.arange(n) if js is None else np.unique(np.asarray(js, dtype=int))
    jf = js.astype(float)
    origin_ok = drop.kind == "disk" and origin_applicable(pot)[0]
    win = window_bounds(pot, crit, n, M, drop=drop) if crit is not None and crit.m == 1 else None

    regime = np.full(js.shape, "bulk", dtype=object)
    log_u, r_tau, err, ok = _bulk_arrays(pot, crit, jf, n, drop)
    if win is not None:
        in_win = (js >= win.j_lo) & (js <= win.j_hi)
        c_log, _, c_err, c_ok = _critical_arrays(pot, crit, jf, n, drop)
        log_u = np.where(in_win, c_log, log_u)
        err = np.where(in_win, c_err, err)
        ok = np.where(in_win, c_ok, ok)
        regime[in_win] = "critical"
    if origin_ok:
        near = js <= n ** origin_exponent
        o_log, o_err = _origin_arrays(pot, jf, n)
        log_u = np.where(near, o_log, log_u)
        err = np.where(near, o_err, err)
        ok = ok | near
        regime[near] = "origin"
        r_tau = np.where(near, np.nan, r_tau)
    if not np.all(ok):
        bad = ~ok
        exact = log_norm_table(pot, n, js[bad], crit=crit, drop=drop)
        log_u[bad] = exact.log_u
        err[bad] = exact.err_est
        regime[bad] = "exact"
    return NormTable(n=n, j=js, log_u=log_u, regime=regime, r_tau=r_tau,
                     x=_x_of(crit, r_tau, n), err_est=err)


def _table_from_entries(n: int, entries: Sequence[NormEntry]) -> NormTable:
    return NormTable(
        n=n,
        j=np.array([e.j for e in entries], dtype=int),
        log_u=np.array([e.log_u for e in entries]),
        regime=np.array([e.regime for e in entries], dtype=object),
        r_tau=np.array([e.r_tau for e in entries]),
        x=np.array([e.x for e in entries]),
        err_est=np.array([e.err_est for e in entries]),
    )


def norm_entries(pot: RadialPotential, n: int, js: Sequence[int], regime: str,
                 crit: CriticalityData | None = None, spec: QuadratureSpec = DEFAULT_SPEC,
                 M: float = 2.0) -> NormTable:
    """Dispatch used by the CLI: one regime for all requested j (or ``auto``)."""
    drop = droplet(pot)
    if regime == "exact":
        return log_norm_table(pot, n, js, spec, crit, drop)
    if regime == "auto":
        return log_norm_auto_table(pot, crit, n, js, M, drop)
    if regime == "bulk":
        return _table_from_entries(n, [log_norm_bulk_asym(pot, crit, int(j), n, drop) for j in js])
    if regime == "critical":
        if crit is None:
            raise RegimeInapplicableError("critical regime needs a critical ring")
        return _table_from_entries(n, [log_norm_critical_asym(pot, crit, int(j), n, drop) for j in js])
    if regime == "origin":
        return _table_from_entries(n, [log_norm_origin_asym(pot, int(j), n) for j in js])
    raise ValueError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# Euler-Maclaurin

BERNOULLI = {2: Fraction(1, 6), 4: Fraction(-1, 30), 6: Fraction(1, 42), 8: Fraction(-1, 30),
             10: Fraction(5, 66)}


@dataclass(frozen=True)
class EulerMaclaurinResult:
    value: float
    error_bound: float | None


def euler_maclaurin(f: Callable[[float], float], p: int, q: int, k: int,
                    derivative: Callable[[float, int], float], integral: float | None = None,
                    deriv_2k_abs_integral: float | None = None) -> EulerMaclaurinResult:
    """Approximate sum_{i=p}^{q} f(i) with k Bernoulli correction terms.

    ``derivative(x, order)`` must supply f^(order)(x) for odd orders up to
    2k-1. If ``integral`` is omitted it is computed by adaptive quadrature.
    Given ``deriv_2k_abs_integral`` = int_p^q |f^(2k)|, the remainder bound
    2 zeta(2k)/(2 pi)^(2k) times that integral is returned too.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if 2 * k not in BERNOULLI:
        raise ValueError("k must be at most 5")
    if q <= p:
        raise ValueError("need q > p")
    if integral is None:
        integral, _ = integrate.quad(f, p, q, epsabs=1e-14, epsrel=1e-13, limit=500)
    total = integral + 0.5 * (f(p) + f(q))
    for i in range(1, k + 1):
        b = BERNOULLI[2 * i]
        total += float(b) / math.factorial(2 * i) * (derivative(q, 2 * i - 1) - derivative(p, 2 * i - 1))
    bound = None
    if deriv_2k_abs_integral is not None:
        bound = 2.0 * float(zeta(2 * k)) / (2 * math.pi) ** (2 * k) * deriv_2k_abs_integral
    return EulerMaclaurinResult(float(total), bound)
