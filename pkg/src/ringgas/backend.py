"""Selects the compiled power-sum kernels when available.

Set ``RINGGAS_BACKEND=python`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if os.environ.get("RINGGAS_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

impl = _compiled if _compiled is not None else _kernels_py
NAME = "cython" if _compiled is not None else "python"

power_sum = impl.power_sum
diag_profile = impl.diag_profile


def implementations() -> dict:
    """All importable implementations keyed by name (used by tests and benchmarks)."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
