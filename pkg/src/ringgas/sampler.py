"""Exact sampling of the radial determinantal ensemble.

For a radial weight the moduli of the n points are independent with
densities r^(2j+1) exp(-n q(r)) / u_j, j = 0..n-1, and the angles are
independent uniforms. Each layer is inverted through a cumulative table in
t = log r refined by safeguarded Newton steps on the exact CDF.

Randomness comes from Philox streams keyed by (seed, sample id), so a
configuration depends only on (seed, sample id, n, potential).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .equilibrium import Droplet, droplet
from .errors import ConfigError, DomainError, NumericalError
from .norms import DEFAULT_SPEC, _cut_points, _peak, _phi
from .potential import RadialPotential, radial_laplacian
from .quadrature import gauss_legendre

CDF_TOL = 1e-12


@dataclass(frozen=True)
class PointConfiguration:
    n: int
    points: np.ndarray
    seed: int
    sample_id: int = 0
    tag: str = ""


class LayerSampler:
    """Inverse-CDF tables for all n radial layers of one potential."""

    def __init__(self, pot: RadialPotential, n: int, panels: int = 24, order: int = 16,
                 drop: Droplet | None = None):
        if n < 1:
            raise DomainError("n must be >= 1")
        self.pot, self.n, self.order = pot, n, order
        drop = drop or droplet(pot)
        js = np.arange(n, dtype=float)
        self.a = 2.0 * js + 2.0
        r0 = _peak(pot, js, n, drop)
        self.t0 = np.log(r0)
        self.phi0 = _phi(pot, self.t0, self.a, n)
        curv = n * r0 ** 2 * np.abs(radial_laplacian(pot, r0, 0))
        guess = np.sqrt(2.0 * DEFAULT_SPEC.log_drop / (curv + math.sqrt(n)))
        left = _cut_points(pot, self.t0, self.a, n, self.phi0, DEFAULT_SPEC.log_drop, -1.0, guess)
        right = _cut_points(pot, self.t0, self.a, n, self.phi0, DEFAULT_SPEC.log_drop, 1.0, guess)
        # panel edges per layer: `panels` on each side of the peak
        u = np.linspace(0.0, 1.0, panels + 1)
        self.edges = np.concatenate(
            ((self.t0 - left)[:, None] + left[:, None] * u[None, :-1],
             self.t0[:, None] + right[:, None] * u[None, :]), axis=1)
        x, w = gauss_legendre(order)
        h = np.diff(self.edges, axis=1)
        nodes = self.edges[:, :-1, None] + h[:, :, None] * x
        vals = self._density(nodes.reshape(n, -1), np.arange(n)).reshape(nodes.shape)
        per_panel = h * (vals @ w)
        cum = np.concatenate((np.zeros((n, 1)), np.cumsum(per_panel, axis=1)), axis=1)
        self.total = cum[:, -1].copy()
        self.cum = cum / self.total[:, None]
        if np.any(np.diff(self.cum, axis=1) < 0):
            raise NumericalError("layer CDF table is not monotone", n=n)

    def _density(self, t: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Unnormalised layer density in t, shifted by its peak value."""
        return np.exp(_phi(self.pot, t, self.a[rows, None] if t.ndim == 2 else self.a[rows], self.n)
                      - (self.phi0[rows, None] if t.ndim == 2 else self.phi0[rows]))

    def _partial(self, rows: np.ndarray, k: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Normalised integral of layer `rows` from edge k to t."""
        x, w = gauss_legendre(self.order)
        lo = self.edges[rows, k]
        h = t - lo
        nodes = lo[:, None] + h[:, None] * x[None, :]
        vals = np.exp(_phi(self.pot, nodes, self.a[rows, None], self.n) - self.phi0[rows, None])
        return h * (vals @ w) / self.total[rows]

    def cdf(self, j, r) -> np.ndarray:
        """Layer CDF evaluated at radius r (vectorised over paired j, r)."""
        rows = np.atleast_1d(np.asarray(j, dtype=int))
        t = np.log(np.atleast_1d(np.asarray(r, dtype=float)))
        rows, t = np.broadcast_arrays(rows, t)
        rows, t = rows.ravel(), t.ravel()
        out = np.empty(t.shape)
        below = t <= self.edges[rows, 0]
        above = t >= self.edges[rows, -1]
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = 1.0
        if np.any(mid):
            rm, tm = rows[mid], t[mid]
            k = np.sum(self.edges[rm] <= tm[:, None], axis=1) - 1
            out[mid] = self.cum[rm, k] + self._partial(rm, k, tm)
        return out

    def invert(self, u: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
        """Radii R with CDF_rows(R) = u; by default one value per layer in order."""
        u = np.asarray(u, dtype=float)
        rows = np.arange(self.n) if rows is None else np.asarray(rows, dtype=int)
        k = np.sum(self.cum[rows, 1:-1] <= u[:, None], axis=1)
        lo, hi = self.edges[rows, k], self.edges[rows, k + 1]
        target = u - self.cum[rows, k]
        width = self.cum[rows, k + 1] - self.cum[rows, k]
        t = lo + (hi - lo) * np.clip(target / np.where(width > 0, width, 1.0), 0.0, 1.0)
        for _ in range(60):
            res = self._partial(rows, k, t) - target
            done = np.abs(res) <= CDF_TOL
            if np.all(done):
                break
            lo = np.where(res < 0, t, lo)
            hi = np.where(res > 0, t, hi)
            dens = self._density(t, rows) / self.total[rows]
            step = np.where(dens > 0, res / np.where(dens > 0, dens, 1.0), np.inf)
            newton = t - step
            inside = (newton > lo) & (newton < hi)
            t = np.where(done, t, np.where(inside, newton, 0.5 * (lo + hi)))
        else:
            raise NumericalError("layer inversion did not converge", n=self.n,
                                 worst=float(np.max(np.abs(res))))
        return np.exp(t)


def _stream(seed: int, sample_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, sample_id]))


def sample(pot: RadialPotential, n: int, seed: int, sample_id: int = 0,
           layers: LayerSampler | None = None) -> PointConfiguration:
    layers = layers or LayerSampler(pot, n)
    if layers.n != n:
        raise ConfigError("layer tables were built for a different n")
    draws = _stream(seed, sample_id).random(2 * n)
    radii = layers.invert(draws[:n])
    return PointConfiguration(n, radii * np.exp(2j * math.pi * draws[n:]), seed, sample_id, pot.tag)


def sample_many(pot: RadialPotential, n: int, n_samples: int, seed: int, threads: int = 1,
                layers: LayerSampler | None = None, batch_points: int = 200_000) -> list[PointConfiguration]:
    """Configurations for sample ids 0..n_samples-1, identical to repeated ``sample`` calls.

    Layers of several configurations are inverted together in batches.
    """
    layers = layers or LayerSampler(pot, n)
    per_batch = max(1, batch_points // n)
    batches = [range(i, min(i + per_batch, n_samples)) for i in range(0, n_samples, per_batch)]

    def run(ids: range) -> list[PointConfiguration]:
        draws = np.stack([_stream(seed, i).random(2 * n) for i in ids])
        rows = np.tile(np.arange(n), len(ids))
        radii = layers.invert(draws[:, :n].ravel(), rows).reshape(len(ids), n)
        pts = radii * np.exp(2j * math.pi * draws[:, n:])
        return [PointConfiguration(n, pts[k], seed, i, pot.tag) for k, i in enumerate(ids)]

    if threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, batches))
    else:
        parts = [run(b) for b in batches]
    return [c for part in parts for c in part]


@dataclass(frozen=True)
class CountStats:
    mean: float
    stderr: float
    n_samples: int


def _count_stats(counts: np.ndarray) -> CountStats:
    m = counts.size
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return CountStats(mean, stderr, m)


def count_in_disk_stats(pot: RadialPotential, n: int, center: complex, radius: float,
                        n_samples: int, seed: int, threads: int = 1,
                        configs: Sequence[PointConfiguration] | None = None) -> CountStats:
    if n_samples < 100:
        raise ConfigError("count statistics need at least 100 samples")
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    configs = configs if configs is not None else sample_many(pot, n, n_samples, seed, threads)
    counts = np.array([np.count_nonzero(np.abs(c.points - center) < radius) for c in configs[:n_samples]],
                      dtype=float)
    return _count_stats(counts)


@dataclass(frozen=True)
class SpacingEstimate:
    s_hat: float
    stderr: float
    n: int
    n_samples: int


def spacing_from_samples(configs: Sequence[PointConfiguration], center: complex,
                         s_grid: np.ndarray) -> SpacingEstimate:
    """Radius at which the mean count in D(center, s) crosses 1.

    Mean counts on ``s_grid`` are interpolated linearly; the error follows
    from the count standard error divided by the local slope.
    """
    if not configs:
        raise ConfigError("no configurations")
    s_grid = np.asarray(s_grid, dtype=float)
    dist = np.stack([np.abs(c.points - center) for c in configs])
    counts = (dist[:, :, None] < s_grid[None, None, :]).sum(axis=1).astype(float)
    mean = counts.mean(axis=0)
    if not (mean[0] < 1.0 <= mean[-1]):
        raise NumericalError("s grid does not bracket a mean count of 1",
                             first=float(mean[0]), last=float(mean[-1]))
    i = int(np.argmax(mean >= 1.0))
    s0, s1, m0, m1 = s_grid[i - 1], s_grid[i], mean[i - 1], mean[i]
    s_hat = s0 + (1.0 - m0) * (s1 - s0) / (m1 - m0)
    slope = (m1 - m0) / (s1 - s0)
    se = counts[:, i].std(ddof=1) / math.sqrt(len(configs))
    return SpacingEstimate(float(s_hat), float(se / slope), configs[0].n, len(configs))


@dataclass(frozen=True)
class RadialHistogram:
    edges: np.ndarray
    counts: np.ndarray
    errors: np.ndarray
    density: np.ndarray
    density_errors: np.ndarray


def radial_histogram(configs: Sequence[PointConfiguration], edges) -> RadialHistogram:
    """Counts of |z| per bin, with Poisson errors and density per unit area per configuration.

    The density is directly comparable with K_n(r, r) / pi.
    """
    if not configs:
        raise ConfigError("no configurations")
    if len({c.n for c in configs}) != 1:
        raise ConfigError("configurations have different n")
    edges = np.asarray(edges, dtype=float)
    if np.any(edges < 0) or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be nonnegative and increasing")
    radii = np.concatenate([np.abs(c.points) for c in configs])
    counts, _ = np.histogram(radii, bins=edges)
    errors = np.sqrt(counts)
    area = math.pi * np.diff(edges ** 2) * len(configs)
    return RadialHistogram(edges, counts, errors, counts / area, errors / area)
