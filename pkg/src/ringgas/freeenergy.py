"""Exact log-partition sums and the remainder scan.

log(Z_n / (2 pi)^n) = sum_{j<n} log u_j is compared against

    -n^2 I_Q - (1/2) n log n + n (log(pi/2)/2 - E_Q/2)

and the remainder, divided by n^(1/(2m+2)), is extrapolated in n. Its limit
should equal kappa_{Q,m} C_m / (2m)! (for m = 1, kappa C_1 / 2).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .equilibrium import Droplet, droplet, energy, entropy
from .errors import ConfigError, NumericalError
from .norms import DEFAULT_SPEC, QuadratureSpec, log_norm_table
from .potential import CriticalityData, RadialPotential
from .universal import universal_constant

SCAN_COLUMNS = ("n", "logZ", "term_n2", "term_nlogn", "term_n", "term_quarter", "remainder",
                "scaled_remainder")

FIT_MODELS = {
    # name: basis functions of (n, e) beyond the constant
    "log+const": (lambda n, e: np.log(n) * n ** -e, lambda n, e: n ** -e),
    "log": (lambda n, e: np.log(n) * n ** -e,),
    "power": (lambda n, e: n ** -e,),
}


@dataclass(frozen=True)
class ScanRow:
    n: int
    logZ: float
    term_n2: float
    term_nlogn: float
    term_n: float
    term_quarter: float
    remainder: float
    scaled_remainder: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in SCAN_COLUMNS)


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple[float, ...]
    residuals: tuple[float, ...]
    condition_number: float

    @property
    def A(self) -> float:
        return self.coefficients[0]


@dataclass
class ScanResult:
    rows: list[ScanRow]
    fit: FitResult | None
    alternatives: dict[str, FitResult]
    predicted_coefficient: float | None
    exponent: float
    I_Q: float
    E_Q: float
    metadata: dict = field(default_factory=dict)

    fit_model: str = "log+const"

    @property
    def A(self) -> float | None:
        return self.fit.A if self.fit is not None else None

    def summary(self) -> dict:
        fit = self.fit
        return {
            "A": self.A,
            "fit_model": self.fit_model,
            "coefficients": list(fit.coefficients) if fit else None,
            "residuals": list(fit.residuals) if fit else None,
            "condition_number": fit.condition_number if fit else None,
            "predicted_A": self.predicted_coefficient,
            "exponent": self.exponent,
            "I_Q": self.I_Q,
            "E_Q": self.E_Q,
            "alternatives": {k: {"A": v.A, "coefficients": list(v.coefficients),
                                 "residuals": list(v.residuals)}
                             for k, v in self.alternatives.items()},
        }


def log_partition(pot: RadialPotential, n: int, spec: QuadratureSpec = DEFAULT_SPEC,
                  drop: Droplet | None = None, with_factorial: bool = False,
                  threads: int = 1) -> float:
    """sum_{j<n} log u_j from exact norms (plus log n! on request)."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    table = log_norm_table(pot, n, spec=spec, drop=drop, threads=threads)
    total = math.fsum(table.log_u)
    if with_factorial:
        total += math.lgamma(n + 1)
    return total


def quarter_coefficient(crit: CriticalityData | None) -> float:
    """kappa_{Q,m} C_m / (2m)!; zero without a critical ring."""
    if crit is None:
        return 0.0
    return crit.kappa * universal_constant(crit.m) / math.factorial(2 * crit.m)


def prediction(crit: CriticalityData | None, n: int, I_Q: float, E_Q: float) -> dict:
    """The predicted expansion terms for one n."""
    exponent = crit.scale_exponent if crit is not None else 0.25
    return {
        "term_n2": -n * n * I_Q,
        "term_nlogn": -0.5 * n * math.log(n),
        "term_n": n * (0.5 * math.log(math.pi / 2) - 0.5 * E_Q),
        "term_quarter": n ** exponent * quarter_coefficient(crit),
    }


def scan_row(n: int, logZ: float, terms: dict, exponent: float) -> ScanRow:
    remainder = logZ - terms["term_n2"] - terms["term_nlogn"] - terms["term_n"]
    return ScanRow(n=n, logZ=logZ, remainder=remainder, scaled_remainder=remainder / n ** exponent,
                   **terms)


def fit_remainder(ns: Sequence[int], values: Sequence[float], model: str = "log+const",
                  exponent: float = 0.25, max_condition: float = 1e8) -> FitResult:
    """Least squares fit of values(n) = A + sum_k c_k basis_k(n)."""
    if model not in FIT_MODELS:
        raise ConfigError(f"unknown fit model {model!r}; choose from {sorted(FIT_MODELS)}")
    n = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    basis = FIT_MODELS[model]
    if n.size < len(basis) + 2:
        raise ConfigError(f"fit model {model!r} needs at least {len(basis) + 2} grid points")
    X = np.column_stack([np.ones_like(n)] + [b(n, exponent) for b in basis])
    cond = float(np.linalg.cond(X))
    if not np.isfinite(cond) or cond > max_condition:
        raise NumericalError("remainder fit is ill-conditioned", condition_number=cond, model=model)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return FitResult(model, tuple(float(c) for c in coef), tuple(float(r) for r in resid), cond)


def remainder_scan(pot: RadialPotential, n_grid: Sequence[int], crit: CriticalityData | None = None,
                   fit_model: str = "log+const", spec: QuadratureSpec = DEFAULT_SPEC,
                   with_factorial: bool = False, threads: int = 1) -> ScanResult:
    """Rows for every n in the grid plus the extrapolated scaled-remainder limit.

    The default model A + (B log n + C) n^(-e) allows for the O(log n) and O(1)
    terms that follow the n^e term; the one-term models are reported as
    alternatives. A model is fitted only when the grid has at least two more
    points than the model has coefficients; otherwise its fit is None.
    """
    n_grid = [int(n) for n in n_grid]
    if fit_model not in FIT_MODELS:
        raise ConfigError(f"unknown fit model {fit_model!r}; choose from {sorted(FIT_MODELS)}")
    if not n_grid:
        raise ConfigError("n_grid is empty")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError("n_grid must be strictly increasing")
    drop = droplet(pot)
    I_Q = energy(pot, drop)
    E_Q = entropy(pot, drop, crit)
    exponent = crit.scale_exponent if crit is not None else 0.25

    def one(n):
        # per-row work stays single threaded so the sum order never depends on scheduling
        return log_partition(pot, n, spec, drop, with_factorial)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            logZs = list(pool.map(one, n_grid))
    else:
        logZs = [one(n) for n in n_grid]
    rows = [scan_row(n, z, prediction(crit, n, I_Q, E_Q), exponent) for n, z in zip(n_grid, logZs)]
    ns = [r.n for r in rows]
    ys = [r.scaled_remainder for r in rows]
    fits = {name: fit_remainder(ns, ys, name, exponent) for name in FIT_MODELS
            if len(ns) >= len(FIT_MODELS[name]) + 2}
    fit = fits.pop(fit_model, None)
    predicted = quarter_coefficient(crit) if crit is not None else 0.0
    return ScanResult(rows, fit, fits, predicted, exponent, I_Q, E_Q, fit_model=fit_model)


def rows_as_dicts(rows: Sequence[ScanRow]) -> list[dict]:
    return [asdict(r) for r in rows]
