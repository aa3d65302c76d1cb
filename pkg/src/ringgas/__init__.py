"""Numerics for the radial two-dimensional Coulomb gas at beta = 2 near a critical ring."""
from __future__ import annotations

__version__ = "0.1.0"

from .equilibrium import Droplet, WindowBounds, droplet, energy, entropy, r_of_tau, window_bounds
from .errors import (
    ConfigError,
    DomainError,
    InvalidPotentialError,
    NumericalError,
    RegimeInapplicableError,
    RingGasError,
)
from .freeenergy import log_partition, remainder_scan
from .kernel import (
    DiagonalProfile,
    double_scaling_error,
    expected_count,
    kernel_full,
    kernel_windowed,
    mean_level_spacing,
)
from .norms import (
    NormTable,
    QuadratureSpec,
    euler_maclaurin,
    log_norm_auto_table,
    log_norm_bulk_asym,
    log_norm_critical_asym,
    log_norm_exact,
    log_norm_origin_asym,
    log_norm_table,
)
from .potential import (
    CriticalityData,
    RadialPotential,
    build_from_laplacian_profile,
    builtin_cubic,
    custom,
    detect_criticality,
    gaussian,
    validate_admissibility,
)
from .sampler import count_in_disk_stats, radial_histogram, sample, sample_many
from .universal import f1, k_star, pearcey, rho, universal_constant

__all__ = [
    "__version__",
    "Droplet",
    "WindowBounds",
    "droplet",
    "energy",
    "entropy",
    "r_of_tau",
    "window_bounds",
    "ConfigError",
    "DomainError",
    "InvalidPotentialError",
    "NumericalError",
    "RegimeInapplicableError",
    "RingGasError",
    "log_partition",
    "remainder_scan",
    "DiagonalProfile",
    "double_scaling_error",
    "expected_count",
    "kernel_full",
    "kernel_windowed",
    "mean_level_spacing",
    "NormTable",
    "QuadratureSpec",
    "euler_maclaurin",
    "log_norm_auto_table",
    "log_norm_bulk_asym",
    "log_norm_critical_asym",
    "log_norm_exact",
    "log_norm_origin_asym",
    "log_norm_table",
    "CriticalityData",
    "RadialPotential",
    "build_from_laplacian_profile",
    "builtin_cubic",
    "custom",
    "detect_criticality",
    "gaussian",
    "validate_admissibility",
    "count_in_disk_stats",
    "radial_histogram",
    "sample",
    "sample_many",
    "f1",
    "k_star",
    "pearcey",
    "rho",
    "universal_constant",
]
