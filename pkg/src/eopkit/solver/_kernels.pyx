# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the solver's hot loops.

Same contracts as ``_kernels_py``; see that module for the algorithm
descriptions.  These versions run the coordinate and iteration loops in
C, which matters because one training solve performs tens of thousands
of O(k^2) iterations.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY

cnp.import_array()

BACKEND = "compiled"


def lasso_cd_gram(
    cnp.float64_t[:, ::1] gram,
    cnp.float64_t[::1] linear,
    double l1,
    cnp.float64_t[::1] theta0,
    int max_sweeps,
    double tol,
):
    cdef Py_ssize_t k = gram.shape[0]
    theta_arr = np.array(theta0, dtype=np.float64)
    g_theta_arr = np.asarray(gram) @ theta_arr
    cdef cnp.float64_t[::1] theta = theta_arr
    cdef cnp.float64_t[::1] g_theta = g_theta_arr
    cdef double half_l1 = 0.5 * l1
    cdef Py_ssize_t sweeps = 0, j, i
    cdef double delta_max, old, new, resid, diag, diff
    for sweeps in range(1, max_sweeps + 1):
        delta_max = 0.0
        for j in range(k):
            old = theta[j]
            diag = gram[j, j]
            if diag <= 0.0:
                if old != 0.0:
                    for i in range(k):
                        g_theta[i] -= old * gram[i, j]
                    theta[j] = 0.0
                continue
            resid = linear[j] - (g_theta[j] - diag * old)
            if resid > half_l1:
                new = (resid - half_l1) / diag
            elif resid < -half_l1:
                new = (resid + half_l1) / diag
            else:
                new = 0.0
            if new != old:
                diff = new - old
                for i in range(k):
                    g_theta[i] += diff * gram[i, j]
                theta[j] = new
                if fabs(diff) > delta_max:
                    delta_max = fabs(diff)
        if delta_max <= tol:
            break
    return theta_arr, sweeps


def prox_subgradient_maxmin(
    cnp.float64_t[:, ::1] slopes,
    cnp.float64_t[::1] offsets,
    cnp.float64_t[:, ::1] gram,
    cnp.float64_t[::1] linear,
    double loss_const,
    double multiplier,
    double l1,
    double loss_bound,
    cnp.float64_t[::1] theta0,
    int iterations,
    double step_scale,
):
    cdef Py_ssize_t k = gram.shape[0]
    cdef Py_ssize_t m = slopes.shape[0]
    theta_arr = np.array(theta0, dtype=np.float64)
    best_arr = theta_arr.copy()
    g_theta_arr = np.empty(k, dtype=np.float64)
    cdef cnp.float64_t[::1] theta = theta_arr
    cdef cnp.float64_t[::1] best = best_arr
    cdef cnp.float64_t[::1] g_theta = g_theta_arr
    cdef double best_value = -INFINITY
    cdef Py_ssize_t t, i, j, z
    cdef double q, value, step, gv, worst, acc, raw, thr
    for t in range(1, iterations + 1):
        for i in range(k):
            acc = 0.0
            for j in range(k):
                acc += gram[i, j] * theta[j]
            g_theta[i] = acc
        worst = INFINITY
        z = 0
        for i in range(m):
            gv = offsets[i]
            for j in range(k):
                gv += slopes[i, j] * theta[j]
            if gv < worst:
                worst = gv
                z = i
        q = loss_const
        for j in range(k):
            q += theta[j] * g_theta[j] - 2.0 * linear[j] * theta[j] + l1 * fabs(theta[j])
        value = worst - multiplier * (q - loss_bound)
        if value > best_value:
            best_value = value
            for j in range(k):
                best[j] = theta[j]
        step = step_scale / sqrt(<double> t)
        thr = step * multiplier * l1
        for j in range(k):
            raw = theta[j] + step * (slopes[z, j] - 2.0 * multiplier * (g_theta[j] - linear[j]))
            if raw > thr:
                theta[j] = raw - thr
            elif raw < -thr:
                theta[j] = raw + thr
            else:
                theta[j] = 0.0
    return best_arr, best_value, theta_arr
