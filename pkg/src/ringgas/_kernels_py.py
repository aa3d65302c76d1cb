"""Numpy implementations of the weighted power sums.

These mirror ``_kernels.pyx`` one-for-one and are used when the compiled
extension is unavailable.
"""
from __future__ import annotations

import numpy as np


def power_sum(log_c: np.ndarray, j: np.ndarray, s: float, phi: float) -> tuple[float, float]:
    """log|S| and arg S for S = sum_k exp(log_c[k] + j[k] s) e^{i j[k] phi}.

    ``s`` may be -inf (a point at the origin); then only j = 0 contributes.
    """
    log_c = np.asarray(log_c, dtype=float)
    j = np.asarray(j, dtype=float)
    if np.isneginf(s):
        zero = j == 0
        if not np.any(zero):
            return -np.inf, 0.0
        return float(np.logaddexp.reduce(log_c[zero])), 0.0
    a = log_c + j * s
    top = a.max()
    w = np.exp(a - top)
    re = float(np.dot(w, np.cos(j * phi)))
    im = float(np.dot(w, np.sin(j * phi)))
    mod = np.hypot(re, im)
    if mod == 0.0:
        return -np.inf, 0.0
    return top + float(np.log(mod)), float(np.arctan2(im, re))


def diag_profile(log_c: np.ndarray, j: np.ndarray, log_r: np.ndarray) -> np.ndarray:
    """log sum_k exp(log_c[k] + 2 j[k] log_r[i]) for every entry of ``log_r``."""
    log_c = np.asarray(log_c, dtype=float)
    j = np.asarray(j, dtype=float)
    log_r = np.asarray(log_r, dtype=float)
    flat = log_r.ravel()
    out = np.empty(flat.shape)
    step = max(1, 2_000_000 // max(1, j.size))
    for start in range(0, flat.size, step):
        lr = flat[start:start + step]
        a = log_c[None, :] + 2.0 * j[None, :] * lr[:, None]
        out[start:start + step] = np.logaddexp.reduce(a, axis=1)
    return out.reshape(log_r.shape)
