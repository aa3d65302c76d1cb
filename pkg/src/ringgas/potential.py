"""Radially symmetric potentials Q(z) = q(|z|) and ring-criticality detection.

Three families are supported:

* ``cubic``: q(r) = r^3/3 - t r^2/2 + c r, critical at t = sqrt(3);
* ``laplacian-profile``: q reconstructed from a prescribed Laplacian profile
  via (r q'(r))' = r w(r); polynomial (plus c/r) profiles are handled in
  closed form, tabulated or callable profiles numerically;
* ``custom``: user-supplied derivative evaluators.

The radius convention is used throughout: q is a function of r = |z| and the
radial Laplacian is q'' + q'/r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from .errors import (
    DomainError,
    InconsistentCriticalityError,
    InvalidPotentialError,
    InvalidProfileError,
    NoInteriorMinimumError,
    NotCriticalError,
    UnsupportedOrderError,
)
from .quadrature import panel_nodes

ArrayLike = float | np.ndarray


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Immutable radial potential with derivative access up to a fixed order.

    For closed-form families ``q = poly(r) + log_coef * log(r)``.
    """

    family: str
    params: Mapping[str, object]
    max_derivative_order: int
    poly: Polynomial | None = None
    log_coef: float = 0.0
    evaluators: tuple[Callable[[np.ndarray], np.ndarray], ...] = ()
    low_accuracy: bool = False
    tag: str = ""

    def __post_init__(self):
        if self.max_derivative_order < 5:
            raise InvalidPotentialError(
                f"potential must provide at least 5 derivatives, got {self.max_derivative_order}")

    # all heavy lifting is vectorised; scalars in give floats out
    def derivative(self, r: ArrayLike, k: int = 0) -> ArrayLike:
        return eval_derivative(self, r, k)

    def __call__(self, r: ArrayLike) -> ArrayLike:
        return eval_derivative(self, r, 0)

    def laplacian(self, r: ArrayLike, k: int = 0) -> ArrayLike:
        return radial_laplacian(self, r, k)

    @property
    def is_closed_form(self) -> bool:
        return self.poly is not None


@dataclass(frozen=True)
class CriticalityData:
    r_star: float
    tau_star: float
    m: int
    gamma: float
    kappa: float
    droplet_kind: str

    @property
    def scale_exponent(self) -> float:
        """Local scale exponent 1/(2m+2); 1/4 for m = 1."""
        return 1.0 / (2 * self.m + 2)


def _as_radius(r: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"radius must be positive, got min {np.min(arr)!r}")
    return arr, arr.ndim == 0


def _log_derivative(r: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.log(r)
    return (-1.0) ** (k - 1) * math.factorial(k - 1) / r ** k


def eval_derivative(pot: RadialPotential, r: ArrayLike, k: int = 0) -> ArrayLike:
    """k-th derivative of q at r (vectorised over r)."""
    if k < 0 or k > pot.max_derivative_order:
        raise UnsupportedOrderError(
            f"order {k} outside 0..{pot.max_derivative_order} for {pot.family}")
    arr, scalar = _as_radius(r)
    if pot.poly is not None:
        out = pot.poly.deriv(k)(arr) if k else pot.poly(arr)
        if pot.log_coef:
            out = out + pot.log_coef * _log_derivative(arr, k)
    else:
        out = np.asarray(pot.evaluators[k](arr), dtype=float)
    return float(out) if scalar else out


def radial_laplacian(pot: RadialPotential, r: ArrayLike, k: int = 0) -> ArrayLike:
    """k-th radial derivative of the Laplacian q'' + q'/r."""
    if k < 0 or k + 2 > pot.max_derivative_order:
        raise UnsupportedOrderError(
            f"Laplacian derivative {k} needs q^({k + 2}), have {pot.max_derivative_order}")
    arr, scalar = _as_radius(r)
    out = np.asarray(eval_derivative(pot, arr, k + 2), dtype=float)
    if k == 0:
        out = out + np.asarray(eval_derivative(pot, arr, 1), dtype=float) / arr
        return float(out) if scalar else out
    # Leibniz rule on q'(r) * (1/r)
    for i in range(k + 1):
        out = out + (math.comb(k, i) * eval_derivative(pot, arr, i + 1)
                     * _log_derivative(arr, k - i + 1))
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# constructors


def builtin_cubic(t: float, c: float = 1.0) -> RadialPotential:
    if not (t > 0 and c > 0):
        raise InvalidPotentialError(f"cubic family needs t, c > 0 (got t={t}, c={c})")
    poly = Polynomial([0.0, c, -0.5 * t, 1.0 / 3.0])
    return RadialPotential("cubic", {"t": float(t), "c": float(c)}, 16, poly=poly,
                           tag=f"cubic(t={t:.10g},c={c:.10g})")


def gaussian(a: float = 1.0) -> RadialPotential:
    """q(r) = a r^2 (Ginibre for a = 1), built through the profile route."""
    return build_from_laplacian_profile([4.0 * a], tag=f"gaussian(a={a:.10g})")


def custom(evaluators: Sequence[Callable[[np.ndarray], np.ndarray]], tag: str = "custom",
           numeric_fallback: int = 0) -> RadialPotential:
    """Potential from derivative evaluators ``[q, q', q'', ...]``.

    With ``numeric_fallback > 0`` missing orders (up to that many extra) are
    obtained by central differences of the last supplied evaluator; the
    result is flagged ``low_accuracy``.
    """
    evals = list(evaluators)
    if not evals:
        raise InvalidPotentialError("custom potential needs at least q itself")
    low = False
    for _ in range(numeric_fallback):
        evals.append(_central_difference(evals[-1]))
        low = True
    return RadialPotential("custom", {}, len(evals) - 1, evaluators=tuple(evals),
                           low_accuracy=low, tag=tag)


def _central_difference(f: Callable) -> Callable:
    def df(r):
        r = np.asarray(r, dtype=float)
        h = 1e-3 * np.maximum(r, 1e-2) * 0.25
        h = np.minimum(h, 0.45 * r)
        return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)
    return df


def build_from_laplacian_profile(w, inner_radius: float = 0.0, base_slope: float = 0.0, *,
                                 inverse_r: float = 0.0, check_grid: np.ndarray | None = None,
                                 tag: str | None = None) -> RadialPotential:
    """Reconstruct q with radial Laplacian ``w`` on (inner_radius, inf).

    ``r q'(r) = a*s0 + int_a^r s w(s) ds`` and ``q(a) = 0``. When ``a = 0``
    the slope at the origin is fixed by the profile itself and ``base_slope``
    is ignored.

    ``w`` may be a sequence of ascending polynomial coefficients or a
    ``Polynomial`` (closed form, optionally plus ``inverse_r / r``), a
    callable, or a ``(r_grid, w_values)`` pair interpolated by a cubic spline.
    """
    a = float(inner_radius)
    if a < 0:
        raise InvalidProfileError("inner radius must be >= 0")
    grid = check_grid if check_grid is not None else np.linspace(max(a, 1e-4), max(4.0, 4 * a), 4001)

    if isinstance(w, Polynomial) or (isinstance(w, (list, tuple)) and np.isscalar(w[0])):
        wpoly = w if isinstance(w, Polynomial) else Polynomial(np.asarray(w, dtype=float))
        wvals = wpoly(grid) + inverse_r / grid
        _check_profile(grid, wvals)
        # s*w(s) is a polynomial; its antiderivative P has P(0) = 0
        sw = Polynomial([inverse_r]) + Polynomial([0.0, 1.0]) * wpoly
        P = sw.integ()
        K = a * base_slope - P(a) if a > 0 else 0.0
        qprime_poly = Polynomial(P.coef[1:]) if len(P.coef) > 1 else Polynomial([0.0])
        qpoly = qprime_poly.integ(lbnd=a)
        if a > 0 and K:
            qpoly = qpoly - K * math.log(a)
        label = tag or f"profile(w={list(np.round(wpoly.coef, 10))},a={a:g},s0={base_slope:g})"
        return RadialPotential("laplacian-profile",
                               {"w": tuple(wpoly.coef), "inverse_r": inverse_r,
                                "inner_radius": a, "base_slope": base_slope},
                               16, poly=qpoly, log_coef=float(K), tag=label)

    if callable(w):
        wfun = w
        wderivs = None
    else:
        from scipy.interpolate import make_interp_spline
        rg, wv = (np.asarray(v, dtype=float) for v in w)
        spline = make_interp_spline(rg, wv, k=3)
        wfun = spline
        wderivs = [spline.derivative(i) for i in range(1, 4)]
    _check_profile(grid, np.asarray(wfun(grid), dtype=float))
    return _numeric_profile_potential(wfun, wderivs, a, base_slope, tag)


def _check_profile(grid: np.ndarray, values: np.ndarray) -> None:
    bad = np.flatnonzero(values < -1e-9 * max(1.0, float(np.max(np.abs(values)))))
    if bad.size:
        raise InvalidProfileError(f"profile negative at r={grid[bad[0]]:.6g}")


def _numeric_profile_potential(wfun, wderivs, a: float, s0: float, tag: str | None,
                               r_max: float = 12.0, panels: int = 3000) -> RadialPotential:
    """Profile given as a black box, tabulated once on a dense mesh.

    r q'(r) is accumulated by composite Gauss quadrature of s w(s); q' and q
    are then cubic Hermite interpolants (q' uses q'' = w - q'/r as slope).
    Beyond ``r_max`` the interpolants extrapolate, so keep the droplet well
    inside the table. Derivatives above q'' come from numeric derivatives
    of w and the result is flagged low-accuracy.
    """
    from scipy.interpolate import CubicHermiteSpline

    if wderivs is None:
        wderivs = []
        f = wfun
        for _ in range(3):
            f = _central_difference(f)
            wderivs.append(f)
    start = a if a > 0 else 1e-12
    edges = np.concatenate((np.geomspace(start, start + 0.05 * r_max, panels // 3, endpoint=False),
                            np.linspace(start + 0.05 * r_max, r_max, panels - panels // 3)))
    nodes, weights = panel_nodes(edges, 8)
    sw = nodes * np.asarray(wfun(nodes), dtype=float) * weights
    per_panel = sw.reshape(len(edges) - 1, -1).sum(axis=1)
    head = 0.0 if a > 0 else integrate.quad(lambda x: x * float(wfun(x)), 0.0, start)[0]
    rqp = a * s0 + head + np.concatenate(([0.0], np.cumsum(per_panel)))
    q1v = rqp / edges
    q2v = np.asarray(wfun(edges), dtype=float) - q1v / edges
    q1s = CubicHermiteSpline(edges, q1v, q2v)
    q0s = q1s.antiderivative()
    q0_ref = float(q0s(start))

    def q0(r):
        return q0s(r) - q0_ref

    def q1(r):
        return q1s(r)

    def q2(r):
        return wfun(r) - q1(r) / r

    def q3(r):
        return wderivs[0](r) - q2(r) / r + q1(r) / r ** 2

    def q4(r):
        return wderivs[1](r) - q3(r) / r + 2 * q2(r) / r ** 2 - 2 * q1(r) / r ** 3

    def q5(r):
        return (wderivs[2](r) - q4(r) / r + 3 * q3(r) / r ** 2 - 6 * q2(r) / r ** 3
                + 6 * q1(r) / r ** 4)

    def shape(f):
        def g(r):
            out = np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
            return out.reshape(np.shape(r))
        return g

    return RadialPotential("laplacian-profile", {"inner_radius": a, "base_slope": s0}, 5,
                           evaluators=tuple(shape(f) for f in (q0, q1, q2, q3, q4, q5)),
                           low_accuracy=True, tag=tag or "profile(numeric)")


# ---------------------------------------------------------------------------
# criticality


def detect_criticality(pot: RadialPotential, search_interval: tuple[float, float] | None = None,
                       abs_tol: float = 1e-10, class_rel_tol: float = 1e-6,
                       max_m: int = 4) -> CriticalityData:
    """Locate the critical ring r* and classify its order m.

    m is half the index of the first radial derivative of the Laplacian that
    does not vanish at r*. The refined location is the simple root of the
    derivative of order 2m - 1.
    """
    from .equilibrium import droplet

    if pot.low_accuracy:
        # tabulated or finite-difference derivatives carry ~1e-6 noise
        abs_tol = max(abs_tol, 1e-6)
        class_rel_tol = max(class_rel_tol, 1e-3)
    if search_interval is None:
        drop = droplet(pot)
        lo = max(drop.r0, 1e-6 * drop.r1)
        search_interval = (lo, drop.r1)
    a, b = map(float, search_interval)
    grid = np.linspace(a, b, 4001)[1:-1]
    lap = radial_laplacian(pot, grid, 0)
    i = int(np.argmin(lap))
    if lap[i] < -abs_tol:
        raise NotCriticalError("Laplacian is negative inside the search interval",
                               r=float(grid[i]), laplacian=float(lap[i]))
    if i == 0 or i == grid.size - 1:
        if lap[i] > abs_tol:
            raise NotCriticalError("Laplacian has no zero in the search interval",
                                   min_laplacian=float(lap[i]))
        raise NoInteriorMinimumError("Laplacian minimum sits on the interval boundary",
                                     r=float(grid[i]))
    max_m = min(max_m, (pot.max_derivative_order - 2) // 2)
    lo, hi = grid[i - 1], grid[i + 1]

    def derivs_at(r):
        return [radial_laplacian(pot, r, j) for j in range(2 * max_m + 1)]

    r_star = float(grid[i])
    for m in range(1, max_m + 1):
        f = lambda r, k=2 * m - 1: radial_laplacian(pot, r, k)
        try:
            r_star = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                     maxiter=200)
        except ValueError:
            continue
        d = derivs_at(r_star)
        tol = class_rel_tol * max(1.0, abs(d[2 * m]))
        if all(abs(v) < tol for v in d[:2 * m]) and d[2 * m] > tol:
            break
    else:
        d = derivs_at(r_star)
        tol = class_rel_tol * max(1.0, max(abs(v) for v in d))
        first = next((j for j, v in enumerate(d) if abs(v) > tol), None)
        if first is not None and first % 2 == 1:
            raise InconsistentCriticalityError(
                "first nonvanishing Laplacian derivative has odd order", order=first, r=r_star)
        if d[0] > abs_tol:
            raise NotCriticalError("Laplacian minimum is not zero", r=r_star, laplacian=d[0])
        raise InconsistentCriticalityError("could not classify criticality order", r=r_star)

    if abs(d[0]) > abs_tol:
        raise NotCriticalError("Laplacian minimum is not zero", r=r_star, laplacian=float(d[0]))
    gamma = float(d[2 * m])
    kappa = 0.5 * r_star * gamma ** (1.0 / (2 * m + 2))
    tau_star = 0.5 * r_star * float(eval_derivative(pot, r_star, 1))
    drop = droplet(pot)
    return CriticalityData(r_star=float(r_star), tau_star=tau_star, m=m, gamma=gamma,
                           kappa=kappa, droplet_kind=drop.kind)


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    growth_ok: bool
    growth_violation: float | None
    laplacian_ok: bool
    laplacian_violation: float | None
    unique_ring_ok: bool
    ring_candidates: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.growth_ok and self.laplacian_ok and self.unique_ring_ok

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "growth_ok": self.growth_ok,
            "growth_violation": self.growth_violation,
            "laplacian_ok": self.laplacian_ok,
            "laplacian_violation": self.laplacian_violation,
            "unique_ring_ok": self.unique_ring_ok,
            "ring_candidates": self.ring_candidates,
        }


def validate_admissibility(pot: RadialPotential, report_grid: np.ndarray | None = None, *,
                           growth_delta: float = 0.01, growth_from: float = 10.0,
                           growth_to: float = 1e3, zero_tol: float = 1e-4) -> AdmissibilityReport:
    """Grid checks for growth, Laplacian sign and a single critical ring."""
    grid = np.asarray(report_grid if report_grid is not None else np.geomspace(1e-3, 20.0, 20001))
    ggrid = np.geomspace(growth_from, growth_to, 400)
    with np.errstate(all="ignore"):
        ratio = np.asarray(eval_derivative(pot, ggrid, 0)) / (2 * np.log(ggrid))
    bad = np.flatnonzero(~(ratio > 1 + growth_delta))
    growth_ok = bad.size == 0
    growth_violation = None if growth_ok else float(ggrid[bad[0]])

    lap = np.asarray(radial_laplacian(pot, grid, 0))
    scale = max(1.0, float(np.median(np.abs(lap))))
    neg = np.flatnonzero(lap < -1e-12 * scale)
    laplacian_ok = neg.size == 0
    laplacian_violation = None if laplacian_ok else float(grid[neg[0]])

    interior = (lap[1:-1] <= lap[:-2]) & (lap[1:-1] <= lap[2:]) & (lap[1:-1] <= zero_tol * scale)
    candidates = [float(r) for r in grid[1:-1][interior]]
    unique = len(candidates) <= 1 and laplacian_ok
    return AdmissibilityReport(growth_ok, growth_violation, laplacian_ok, laplacian_violation,
                               unique, candidates)
