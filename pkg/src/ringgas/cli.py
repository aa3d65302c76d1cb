"""Command-line experiment runner.

Every subcommand writes CSV (or JSON) to stdout, or to ``--out``. Exit codes:
0 success, 2 configuration or input error, 3 numerical failure. Diagnostics
go to stderr.

Counts and densities use the measure dA/pi, under which the kernel diagonal
integrates to n over the plane.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import math
import sys
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, backend
from .config import ExperimentConfig
from .csvio import parse_complex, write_csv
from .equilibrium import droplet, energy, entropy, window_bounds
from .errors import (
    ConfigError,
    DomainError,
    InvalidPotentialError,
    NotCriticalError,
    NumericalError,
    UnsupportedOrderError,
)
from .freeenergy import FIT_MODELS, SCAN_COLUMNS, remainder_scan
from .kernel import double_scaling_error, kernel_full, kernel_windowed, mean_level_spacing
from .norms import QuadratureSpec, log_norm_table, norm_entries
from .potential import detect_criticality, validate_admissibility
from .sampler import LayerSampler, sample_many, spacing_from_samples
from .universal import MAX_M, k_star_detail, universal_constant_detail

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

HEADERS = {
    "norms": ("j", "log_u", "regime", "r_tau", "x", "err_est"),
    "kernel": ("n", "z1", "z2", "windowed", "M", "j_lo", "j_hi", "modulus", "log_modulus", "phase"),
    "double-scaling": ("n", "xi1", "xi2", "scaled_modulus", "limit_modulus", "abs_error", "rel_error"),
    "rho": ("m", "xi", "value", "error_estimate"),
    "kstar": ("m", "xi1", "xi2", "value", "modulus", "error_estimate"),
    "free-energy-scan": SCAN_COLUMNS,
    "sample": ("sample_id", "re", "im"),
    "spacing": ("n", "s", "predicted", "predicted_literal", "ratio", "count_at_s"),
}


def _metadata(command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "backend": backend.NAME,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


# ---------------------------------------------------------------------------
# argument helpers


def _int_list(text: str) -> list[int]:
    """'1,2,5', 'a:b' or 'a:b:step' (half open, like range), or a mix: '0:4,10'."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                out.extend(range(*(int(x) for x in part.split(":"))))
            else:
                out.append(int(part))
        except (TypeError, ValueError):
            raise ConfigError(f"bad integer list entry {part!r}") from None
    return out


def _complex_list(text: str) -> list[complex]:
    return [parse_complex(p) for p in text.split(",") if p.strip()]


def _range_grid(text: str) -> np.ndarray:
    """'a:b:step' inclusive of b (up to rounding)."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must be a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ConfigError("grid needs step > 0 and b >= a")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


def _add_common(p: argparse.ArgumentParser, with_n: bool = False) -> None:
    g = p.add_argument_group("potential and run options")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    g.add_argument("--potential", choices=("cubic", "gaussian", "profile"))
    g.add_argument("--t", type=float, help="cubic family: q = r^3/3 - t r^2/2 + c r")
    g.add_argument("--c", type=float)
    g.add_argument("--a", type=float, help="gaussian family: q = a r^2")
    g.add_argument("--profile", help="CSV table with columns r,w giving the Laplacian profile")
    g.add_argument("--profile-order", type=int, choices=(1, 3, 5))
    g.add_argument("--profile-coeffs", help="comma separated polynomial coefficients of the profile")
    g.add_argument("--inner-radius", type=float)
    g.add_argument("--base-slope", type=float)
    g.add_argument("--rel-tol", type=float)
    g.add_argument("--abs-floor", type=float)
    g.add_argument("--threads", type=int, help="worker cap (default: $RINGGAS_THREADS or 1)")
    g.add_argument("--out", help="output path (default stdout)")
    if with_n:
        g.add_argument("--n", type=int)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    extra = {
        "potential.family": args.potential,
        "potential.t": args.t,
        "potential.c": args.c,
        "potential.a": args.a,
        "potential.profile": args.profile,
        "potential.profile_order": args.profile_order,
        "potential.profile_coeffs": args.profile_coeffs,
        "potential.inner_radius": args.inner_radius,
        "potential.base_slope": args.base_slope,
        "quadrature.rel_tol": args.rel_tol,
        "quadrature.abs_floor": args.abs_floor,
        "threads": args.threads,
        "out": args.out,
        "n": getattr(args, "n", None),
        "n_grid": getattr(args, "n_grid", None),
        "M": getattr(args, "M", None),
        "seed": getattr(args, "seed", None),
        "samples": getattr(args, "samples", None),
        "summary": getattr(args, "summary", None),
    }
    cfg = ExperimentConfig.build(args.config, args.set, extra)
    _spec(cfg)
    return cfg


def _need_n(cfg: ExperimentConfig) -> int:
    n = cfg["n"]
    if n is None:
        raise ConfigError("this command needs --n (or n = ... in the config)")
    return int(n)


def _spec(cfg: ExperimentConfig) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=float(cfg["quadrature.rel_tol"]),
                          abs_floor=float(cfg["quadrature.abs_floor"]))


@contextlib.contextmanager
def _output(cfg: ExperimentConfig, stdout):
    path = cfg["out"]
    if path is None:
        yield stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _dump_json(obj: Any, stream) -> None:
    stream.write(json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args, cfg, stdout) -> int:
    if args.universal:
        ms = _int_list(args.m_list)
        out = {}
        for m in ms:
            _check_m(m)
            res = universal_constant_detail(m)
            out[f"C_{m}"] = {"value": res.value, "error_estimate": res.error_estimate}
        out["metadata"] = _metadata("constants --universal")
        with _output(cfg, stdout) as fh:
            _dump_json(out, fh)
        return EXIT_OK
    pot = cfg.potential()
    drop = droplet(pot)
    crit = _crit_or_none(cfg, pot)
    doc = {
        "r0": drop.r0,
        "r1": drop.r1,
        "r_star": crit.r_star if crit else None,
        "tau_star": crit.tau_star if crit else None,
        "m": crit.m if crit else None,
        "gamma": crit.gamma if crit else None,
        "kappa": crit.kappa if crit else None,
        "I_Q": energy(pot, drop),
        "E_Q": entropy(pot, drop, crit),
        "metadata": _metadata("constants"),
    }
    with _output(cfg, stdout) as fh:
        _dump_json(doc, fh)
    return EXIT_OK


def _crit(cfg: ExperimentConfig, pot):
    return detect_criticality(pot, abs_tol=float(cfg["criticality.abs_tol"]))


def _crit_or_none(cfg: ExperimentConfig, pot):
    try:
        return _crit(cfg, pot)
    except NotCriticalError:
        return None


def cmd_norms(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    js = _int_list(args.j_list) if args.j_list else list(range(n))
    if any(j < 0 or j >= n for j in js):
        raise DomainError("every j must satisfy 0 <= j < n")
    crit = _crit_or_none(cfg, pot) if args.regime in ("critical", "auto", "bulk") else None
    table = norm_entries(pot, n, js, args.regime, crit, _spec(cfg), float(cfg["M"]))
    rows = ((e.j, e.log_u, e.regime, e.r_tau, e.x, e.err_est) for e in table)
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["norms"], rows, fh)
    return EXIT_OK


def cmd_kernel(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    z1, z2 = parse_complex(args.z1), parse_complex(args.z2)
    M = float(cfg["M"])
    if args.windowed:
        crit = _crit(cfg, pot)
        win = window_bounds(pot, crit, n, M)
        table = log_norm_table(pot, n, np.arange(win.j_lo, win.j_hi + 1), spec=_spec(cfg))
        kv = kernel_windowed(pot, crit, n, z1, z2, M, table)
        lo, hi = kv.window.j_lo, kv.window.j_hi
    else:
        kv = kernel_full(pot, n, z1, z2, log_norm_table(pot, n, spec=_spec(cfg)))
        lo, hi = 0, n - 1
    row = (n, z1, z2, bool(args.windowed), M, lo, hi, kv.modulus, kv.log_modulus, kv.phase)
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["kernel"], [row], fh)
    return EXIT_OK


def cmd_double_scaling(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    crit = _crit(cfg, pot)
    grid = _complex_list(args.xi_grid)
    second = parse_complex(args.xi2) if args.xi2 is not None else None
    rows = []
    for xi in grid:
        res = double_scaling_error(pot, crit, n, xi, xi if second is None else second,
                                   float(cfg["M"]), windowed=not args.full)
        rows.append((n, res.xi1, res.xi2, res.scaled_modulus, res.limit_modulus, res.abs_error,
                     res.rel_error))
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["double-scaling"], rows, fh)
    return EXIT_OK


def _check_m(m: int) -> None:
    if not 1 <= m <= MAX_M:
        raise ConfigError(f"m must be in 1..{MAX_M}, got {m}")


def cmd_rho(args, cfg, stdout) -> int:
    _check_m(args.m)
    grid = _range_grid(args.re_grid)
    rows = []
    for x in grid:
        xi = complex(float(x), args.im)
        val = k_star_detail(args.m, xi, xi)
        rows.append((args.m, xi, val.value.real, val.error_estimate))
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["rho"], rows, fh)
    return EXIT_OK


def cmd_kstar(args, cfg, stdout) -> int:
    _check_m(args.m)
    xi1, xi2 = parse_complex(args.xi1), parse_complex(args.xi2)
    val = k_star_detail(args.m, xi1, xi2)
    row = (args.m, xi1, xi2, val.value, abs(val.value), val.error_estimate)
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["kstar"], [row], fh)
    return EXIT_OK


def cmd_free_energy_scan(args, cfg, stdout, stderr) -> int:
    pot = cfg.potential()
    if cfg["n_grid"] is None:
        raise ConfigError("free-energy-scan needs --n-grid (or n_grid = ... in the config)")
    crit = _crit_or_none(cfg, pot)
    res = remainder_scan(pot, cfg.n_grid, crit, args.fit_model, _spec(cfg),
                         with_factorial=args.with_factorial, threads=cfg.threads)
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["free-energy-scan"], (r.as_tuple() for r in res.rows), fh)
    summary = res.summary()
    summary["with_factorial"] = bool(args.with_factorial)
    summary["metadata"] = _metadata("free-energy-scan")
    target = cfg["summary"]
    if target is None and cfg["out"] is not None:
        target = f"{cfg['out']}.summary.json"
    if target is None:
        _dump_json(summary, stderr)
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            _dump_json(summary, fh)
    return EXIT_OK


def cmd_sample(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    n_samples, seed = int(cfg["samples"]), int(cfg["seed"])
    if n_samples < 1:
        raise ConfigError("samples must be >= 1")
    configs = sample_many(pot, n, n_samples, seed, cfg.threads)

    def rows():
        for c in configs:
            for z in c.points:
                yield (c.sample_id, float(z.real), float(z.imag))

    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["sample"], rows(), fh)
    return EXIT_OK


def cmd_spacing(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    crit = _crit(cfg, pot)
    res = mean_level_spacing(pot, crit, n)
    row = (n, res.s, res.predicted, res.predicted_literal, res.s / res.predicted, res.count_at_s)
    with _output(cfg, stdout) as fh:
        write_csv(HEADERS["spacing"], [row], fh)
    return EXIT_OK


def cmd_spacing_mc(args, cfg, stdout) -> int:
    pot = cfg.potential()
    n = _need_n(cfg)
    n_samples, seed = int(cfg["samples"]), int(cfg["seed"])
    if n_samples < 2:
        raise ConfigError("spacing-mc needs at least 2 samples")
    crit = _crit(cfg, pot)
    quad = mean_level_spacing(pot, crit, n)
    layers = LayerSampler(pot, n)
    configs = sample_many(pot, n, n_samples, seed, cfg.threads, layers=layers)
    s_grid = np.linspace(0.3 * quad.s, 2.0 * quad.s, 171)
    est = spacing_from_samples(configs, crit.r_star, s_grid)
    doc = {
        "s_hat": est.s_hat,
        "stderr": est.stderr,
        "n": n,
        "samples": n_samples,
        "seed": seed,
        "s_quadrature": quad.s,
        "z_score": (est.s_hat - quad.s) / est.stderr if est.stderr > 0 else None,
        "metadata": _metadata("spacing-mc"),
    }
    with _output(cfg, stdout) as fh:
        _dump_json(doc, fh)
    return EXIT_OK


def cmd_validate(args, cfg, stdout, stderr) -> int:
    pot = cfg.potential()
    report = validate_admissibility(pot).as_dict()
    if report["ok"]:
        try:
            crit = _crit(cfg, pot)
            report["critical_ring"] = {"r_star": crit.r_star, "m": crit.m, "gamma": crit.gamma}
        except NumericalError as exc:
            report["critical_ring"] = None
            report["criticality_error"] = str(exc)
    else:
        problems = []
        if not report["laplacian_ok"]:
            problems.append(f"Laplacian of the potential is negative at r = {report['laplacian_violation']!r}")
        if not report["growth_ok"]:
            problems.append(f"growth condition fails at r = {report['growth_violation']!r}")
        if len(report["ring_candidates"]) > 1:
            problems.append(f"several critical ring candidates: {report['ring_candidates']}")
        report["problems"] = problems
        for p in problems:
            print(f"violation: {p}", file=stderr)
    with _output(cfg, stdout) as fh:
        _dump_json(report, fh)
    return EXIT_OK if report["ok"] else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringgas",
        description="Radial 2-D Coulomb gas at beta = 2 near a critical ring. "
                    "Counts use the measure dA/pi (the kernel diagonal integrates to n).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("constants", help="droplet and critical-ring constants as JSON")
    _add_common(p)
    p.add_argument("--universal", action="store_true", help="print the universal constants C_m")
    p.add_argument("--m-list", default="1,2", help="orders m for --universal (default 1,2)")

    p = sub.add_parser("norms", help="log norms u_j as CSV")
    _add_common(p, with_n=True)
    p.add_argument("--j-list", help="indices, e.g. '0,5,10' or '100:200'")
    p.add_argument("--regime", default="exact", choices=("exact", "bulk", "critical", "origin", "auto"))
    p.add_argument("--M", type=float, help="window constant for --regime auto")

    p = sub.add_parser("kernel", help="finite-n kernel value")
    _add_common(p, with_n=True)
    p.add_argument("--z1", required=True)
    p.add_argument("--z2", required=True)
    p.add_argument("--windowed", action="store_true")
    p.add_argument("--M", type=float)

    p = sub.add_parser("double-scaling", help="rescaled kernel against the limiting kernel")
    _add_common(p, with_n=True)
    p.add_argument("--xi-grid", default="0,1,-1,1+i,-1+2i",
                   help="comma separated points (diagonal pairs unless --xi2 is given)")
    p.add_argument("--xi2", help="fixed second point")
    p.add_argument("--M", type=float)
    p.add_argument("--full", action="store_true", help="use the full kernel sum")

    p = sub.add_parser("rho", help="limiting one-point density on a grid")
    _add_common(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--re-grid", required=True, help="a:b:step")
    p.add_argument("--im", type=float, default=0.0)

    p = sub.add_parser("kstar", help="limiting kernel at one pair of points")
    _add_common(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--xi1", required=True)
    p.add_argument("--xi2", required=True)

    p = sub.add_parser("free-energy-scan", help="log-partition scan and remainder fit")
    _add_common(p)
    p.add_argument("--n-grid", help="e.g. 250,500,1000,2000,4000")
    p.add_argument("--with-factorial", action="store_true", help="include log n! in logZ")
    p.add_argument("--fit-model", default="log+const", choices=sorted(FIT_MODELS))
    p.add_argument("--summary", help="path for the JSON summary (default: stderr or OUT.summary.json)")

    p = sub.add_parser("sample", help="exact samples as CSV")
    _add_common(p, with_n=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("spacing", help="mean level spacing at the critical ring")
    _add_common(p, with_n=True)

    p = sub.add_parser("spacing-mc", help="Monte Carlo mean level spacing")
    _add_common(p, with_n=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("validate", help="admissibility checks for a potential")
    _add_common(p)
    return parser


COMMANDS: dict[str, Callable] = {
    "constants": cmd_constants,
    "norms": cmd_norms,
    "kernel": cmd_kernel,
    "double-scaling": cmd_double_scaling,
    "rho": cmd_rho,
    "kstar": cmd_kstar,
    "sample": cmd_sample,
    "spacing": cmd_spacing,
    "spacing-mc": cmd_spacing_mc,
}
NEEDS_STDERR = {"free-energy-scan": cmd_free_energy_scan, "validate": cmd_validate}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if args.command in NEEDS_STDERR:
            return NEEDS_STDERR[args.command](args, cfg, stdout, stderr)
        return COMMANDS[args.command](args, cfg, stdout)
    except (ConfigError, DomainError, UnsupportedOrderError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (NumericalError, InvalidPotentialError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        # plain ValueErrors come from argument values numpy or scipy reject
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
