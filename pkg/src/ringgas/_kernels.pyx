# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled weighted power sums (same contract as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, cos, sin, atan2, hypot, INFINITY, isinf

cnp.import_array()


def power_sum(log_c, j, double s, double phi):
    cdef const double[::1] lc = np.ascontiguousarray(log_c, dtype=np.float64)
    cdef const double[::1] jj = np.ascontiguousarray(j, dtype=np.float64)
    cdef Py_ssize_t k, n = lc.shape[0]
    cdef double top = -INFINITY, a, w, re = 0.0, im = 0.0, mod
    if isinf(s) and s < 0:
        for k in range(n):
            if jj[k] == 0.0:
                if lc[k] > top:
                    top = lc[k]
        if isinf(top):
            return -INFINITY, 0.0
        for k in range(n):
            if jj[k] == 0.0:
                re += exp(lc[k] - top)
        return top + log(re), 0.0
    for k in range(n):
        a = lc[k] + jj[k] * s
        if a > top:
            top = a
    for k in range(n):
        w = exp(lc[k] + jj[k] * s - top)
        re += w * cos(jj[k] * phi)
        im += w * sin(jj[k] * phi)
    mod = hypot(re, im)
    if mod == 0.0:
        return -INFINITY, 0.0
    return top + log(mod), atan2(im, re)


def diag_profile(log_c, j, log_r):
    cdef const double[::1] lc = np.ascontiguousarray(log_c, dtype=np.float64)
    cdef const double[::1] jj = np.ascontiguousarray(j, dtype=np.float64)
    lr_arr = np.asarray(log_r, dtype=np.float64)
    cdef const double[::1] lr = np.ascontiguousarray(lr_arr.ravel())
    out = np.empty(lr.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i, k, n = lc.shape[0], m = lr.shape[0]
    cdef double top, a, acc, x
    for i in range(m):
        x = 2.0 * lr[i]
        top = -INFINITY
        for k in range(n):
            a = lc[k] + jj[k] * x
            if a > top:
                top = a
        acc = 0.0
        for k in range(n):
            acc += exp(lc[k] + jj[k] * x - top)
        o[i] = top + log(acc)
    return out.reshape(lr_arr.shape)
