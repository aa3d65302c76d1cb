"""Flat ``key = value`` experiment configuration.

A config file holds one assignment per line; ``#`` starts a comment. Values
are Python literals (numbers, quoted strings, lists) or bare words, which
are kept as strings. ``--set key=value`` on the command line uses the same
syntax and overrides the file.
"""
from __future__ import annotations

import ast
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import ConfigError
from .potential import RadialPotential, build_from_laplacian_profile, builtin_cubic, gaussian

# every accepted key with its default (None = unset)
DEFAULTS: dict[str, Any] = {
    "potential.family": "cubic",
    "potential.t": math.sqrt(3.0),
    "potential.c": 1.0,
    "potential.a": 1.0,
    "potential.profile": None,          # path to a CSV table with columns r,w
    "potential.profile_order": 3,
    "potential.profile_coeffs": None,   # ascending polynomial coefficients of w
    "potential.inner_radius": 0.0,
    "potential.base_slope": 0.0,
    "n": None,
    "n_grid": None,
    "M": 2.0,
    "quadrature.rel_tol": 1e-10,
    "quadrature.abs_floor": 1e-18,
    # parameters typed with ~7 significant digits leave a Laplacian minimum of order 1e-8
    "criticality.abs_tol": 1e-6,
    "seed": 0,
    "samples": 100,
    "threads": None,
    "out": None,
    "summary": None,
}

POSITIVE = ("quadrature.rel_tol", "quadrature.abs_floor", "criticality.abs_tol", "M")


def parse_value(text: str) -> Any:
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_lines(lines: Iterable[str], source: str = "<config>") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


@dataclass
class ExperimentConfig:
    values: dict[str, Any] = field(default_factory=lambda: dict(DEFAULTS))

    @classmethod
    def build(cls, file: str | os.PathLike | None = None, overrides: Iterable[str] = (),
              extra: dict[str, Any] | None = None) -> "ExperimentConfig":
        values = dict(DEFAULTS)
        merged: dict[str, Any] = {}
        if file is not None:
            path = Path(file)
            try:
                merged.update(parse_lines(path.read_text(encoding="utf-8").splitlines(), str(path)))
            except OSError as exc:
                raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        merged.update({k: v for k, v in (extra or {}).items() if v is not None})
        merged.update(parse_lines(overrides, "--set"))
        unknown = sorted(set(merged) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values.update(merged)
        cfg = cls(values)
        cfg.validate()
        return cfg

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def validate(self) -> None:
        for key in POSITIVE:
            v = self.values[key]
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{key} must be a positive number, got {v!r}")
        grid = self.values["n_grid"]
        if grid is not None:
            grid = self.n_grid
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("n_grid must be strictly increasing")
        n = self.values["n"]
        if n is not None and (not isinstance(n, int) or n < 1):
            raise ConfigError(f"n must be a positive integer, got {n!r}")
        if self.values["potential.family"] not in ("cubic", "gaussian", "profile"):
            raise ConfigError("potential.family must be one of cubic, gaussian, profile")

    @property
    def n_grid(self) -> list[int]:
        grid = self.values["n_grid"]
        if isinstance(grid, str):
            grid = [parse_value(x) for x in grid.split(",") if x.strip()]
        if isinstance(grid, (int, float)):
            grid = [grid]
        try:
            return [int(x) for x in grid]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad n_grid {grid!r}") from exc

    @property
    def threads(self) -> int:
        t = self.values["threads"]
        if t is None:
            t = os.environ.get("RINGGAS_THREADS", 1)
        try:
            t = int(t)
        except ValueError as exc:
            raise ConfigError(f"threads must be an integer, got {t!r}") from exc
        if t < 1:
            raise ConfigError("threads must be >= 1")
        return t

    def potential(self) -> RadialPotential:
        v = self.values
        family = v["potential.family"]
        if family == "cubic":
            t, c = float(v["potential.t"]), float(v["potential.c"])
            if t <= 0 or c <= 0:
                raise ConfigError("cubic potential needs t > 0 and c > 0")
            return builtin_cubic(t, c)
        if family == "gaussian":
            return gaussian(float(v["potential.a"]))
        a, s0 = float(v["potential.inner_radius"]), float(v["potential.base_slope"])
        if v["potential.profile_coeffs"] is not None:
            coeffs = v["potential.profile_coeffs"]
            if isinstance(coeffs, str):
                coeffs = [float(x) for x in coeffs.split(",")]
            return build_from_laplacian_profile(list(map(float, coeffs)), a, s0)
        if v["potential.profile"] is None:
            raise ConfigError("profile family needs potential.profile or potential.profile_coeffs")
        from .csvio import read_csv

        table = read_csv(Path(v["potential.profile"]))
        try:
            r = np.array([float(row["r"]) for row in table.rows])
            w = np.array([float(row["w"]) for row in table.rows])
        except KeyError as exc:
            raise ConfigError("profile table needs columns r and w") from exc
        except ValueError as exc:
            raise ConfigError(f"profile table has a non-numeric entry: {exc}") from exc
        order = int(v["potential.profile_order"])
        if order not in (1, 3, 5):
            raise ConfigError("potential.profile_order must be 1, 3 or 5")
        from scipy.interpolate import make_interp_spline

        spline = make_interp_spline(r, w, k=order)
        return build_from_laplacian_profile(spline, a, s0, tag=f"profile({v['potential.profile']})")
