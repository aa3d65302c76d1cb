"""Small quadrature toolkit shared by the numerical modules.

Everything here works on numpy arrays and is deterministic: node sets are
cached per order and never depend on the integrand.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights for consecutive panel edges.

    ``edges`` may carry leading batch dimensions; the panel axis is the last
    one. Returned arrays have shape ``(..., n_panels * order)``.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    lo = edges[..., :-1, None]
    h = np.diff(edges, axis=-1)[..., None]
    nodes = lo + h * x
    weights = h * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def graded_edges(a: float, b: float, n_uniform: int, n_graded: int,
                 ratio: float = 0.15) -> np.ndarray:
    """Panel edges on [a, b], geometrically refined toward ``a``.

    Used for integrands with a weak (log-type) singularity at the left end.
    """
    width = b - a
    graded = a + width * ratio ** np.arange(n_graded, 0, -1)
    start = graded[-1] if n_graded else a
    uniform = np.linspace(start, b, n_uniform + 1)
    return np.concatenate(([a], graded, uniform[1:])) if n_graded else uniform


def integrate_graded(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                     order: int = 20, n_uniform: int = 16, n_graded: int = 14,
                     grade_right: bool = False) -> float:
    """Composite GL integral of ``f`` with grading at one endpoint."""
    if grade_right:
        edges = b + a - graded_edges(a, b, n_uniform, n_graded)[::-1]
    else:
        edges = graded_edges(a, b, n_uniform, n_graded)
    nodes, weights = panel_nodes(edges, order)
    return float(np.dot(f(nodes), weights))


@lru_cache(maxsize=16)
def _tanh_sinh_rule(level: int, tmax: float = 4.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = 2.0 ** -level
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    s = 0.5 * np.pi * np.sinh(t)
    # 1 - x and 1 + x without cancellation
    one_minus = 1.0 / (np.exp(s) * np.cosh(s))
    one_plus = 1.0 / (np.exp(-s) * np.cosh(s))
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(s) ** 2
    return one_minus, one_plus, w


def tanh_sinh(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              level: int = 7) -> tuple[float, float]:
    """Double-exponential quadrature on [a, b]; handles endpoint singularities.

    Returns ``(value, error_estimate)`` where the estimate is the change
    from the previous level.
    """
    half = 0.5 * (b - a)

    def rule(lv: int) -> float:
        one_minus, one_plus, w = _tanh_sinh_rule(lv)
        # x = a + half*(1+u); distances to the ends kept exact
        left = a + half * one_plus
        keep = (one_plus > 0) & (one_minus > 0)
        x = left[keep]
        x = np.clip(x, np.nextafter(a, b), np.nextafter(b, a))
        vals = f(x)
        return float(half * np.dot(w[keep], vals))

    coarse = rule(level - 1)
    fine = rule(level)
    return fine, abs(fine - coarse)


def bisect_vectorized(func: Callable[[np.ndarray], np.ndarray], lo: np.ndarray,
                      hi: np.ndarray, iterations: int = 64) -> np.ndarray:
    """Elementwise bisection for ``func(x) = 0`` with ``func(lo) < 0 < func(hi)``.

    ``lo``/``hi`` may be in either order; only the sign convention matters.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        neg = func(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)
