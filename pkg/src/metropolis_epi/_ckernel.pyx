# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Metropolis inner loop for the logistic target.

Mirrors ``_pykernel`` operation for operation; random numbers are drawn
straight from the generator's bit generator, in the same order the
Python path draws them through ``Generator.standard_normal``/``random``.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, exp, fabs, log, log1p
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal, random_standard_uniform


cdef inline double _log_expit(double x) noexcept nogil:
    if x >= 0:
        return -log1p(exp(-x))
    return x - log1p(exp(x))


cdef inline double _expit(double x) noexcept nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _log_acceptance(double cand, double cur) noexcept nogil:
    cdef double diff = cand - cur
    if diff != diff:
        return -INFINITY
    return diff if diff < 0.0 else 0.0


cdef inline bint _accept(double u, double cand, double cur) noexcept nogil:
    cdef double log_u = log(u) if u > 0.0 else -INFINITY
    return log_u < _log_acceptance(cand, cur)


cdef double _logistic_lp(const double* beta,
                         const double[::1] y, const double[::1] x, const double[::1] w,
                         const unsigned char[::1] is_normal,
                         const double[::1] mean, const double[::1] var) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double b0 = beta[0]
    cdef double b1 = beta[1]
    cdef double eta, dev
    cdef double ll = 0.0
    cdef double lp = 0.0
    for i in range(y.shape[0]):
        eta = b0 + b1 * x[i]
        if y[i] == 1.0:
            ll += w[i] * _log_expit(eta)
        else:
            ll += w[i] * _log_expit(-eta)
    for k in range(is_normal.shape[0]):
        if is_normal[k]:
            dev = beta[k] - mean[k]
            lp -= dev * dev / (2.0 * var[k])
    return ll + lp


cdef bitgen_t* _bitgen(rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("generator does not expose a BitGenerator capsule")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


def logistic_log_posterior(double[::1] beta, const double[::1] y, const double[::1] x,
                           const double[::1] w, const unsigned char[::1] is_normal,
                           const double[::1] mean, const double[::1] var):
    return _logistic_lp(&beta[0], y, x, w, is_normal, mean, var)


def run_logistic_segment(double[::1] cur, double cur_lp, double[::1] signs,
                         const double[:, ::1] chol, const double[::1] scale,
                         bint guided, Py_ssize_t n,
                         const double[::1] y, const double[::1] x, const double[::1] w,
                         const unsigned char[::1] is_normal,
                         const double[::1] mean, const double[::1] var,
                         rng,
                         double[:, ::1] draws, double[::1] lps, unsigned char[:, ::1] moves):
    """Advance ``n`` iterations in place; returns the final log density."""
    cdef Py_ssize_t d = cur.shape[0]
    cdef Py_ssize_t j, k, m
    cdef double z, u, lp_c, acc
    cdef double[::1] cand = np.empty(d)
    cdef double[::1] zs = np.empty(d)
    cdef bitgen_t* bg = _bitgen(rng)
    if d != 2:
        raise ValueError("the logistic kernel is two-dimensional")

    with rng.bit_generator.lock, nogil:
        for j in range(n):
            if guided:
                for k in range(d):
                    z = random_standard_normal(bg)
                    for m in range(d):
                        cand[m] = cur[m]
                    cand[k] = cur[k] + signs[k] * fabs(scale[k] * z)
                    lp_c = _logistic_lp(&cand[0], y, x, w, is_normal, mean, var)
                    u = random_standard_uniform(bg)
                    if _accept(u, lp_c, cur_lp):
                        cur[k] = cand[k]
                        cur_lp = lp_c
                        moves[j, k] = 1
                    else:
                        signs[k] = -signs[k]
            else:
                for k in range(d):
                    zs[k] = random_standard_normal(bg)
                for k in range(d):
                    acc = 0.0
                    for m in range(k + 1):
                        acc += chol[k, m] * zs[m]
                    cand[k] = cur[k] + acc
                lp_c = _logistic_lp(&cand[0], y, x, w, is_normal, mean, var)
                u = random_standard_uniform(bg)
                if _accept(u, lp_c, cur_lp):
                    for k in range(d):
                        cur[k] = cand[k]
                        moves[j, k] = 1
                    cur_lp = lp_c
            for k in range(d):
                draws[j, k] = cur[k]
            lps[j] = cur_lp
    return cur_lp


def calibrate_offsets(const double[::1] b0, const double[::1] b1, double incidence, double p1,
                      double lo=-40.0, double hi=10.0, int max_iter=200):
    """Per-draw bisection for the intercept shift; returns ``(offsets, ok)``."""
    cdef Py_ssize_t n = b0.shape[0]
    cdef Py_ssize_t i
    cdef int it
    cdef double a, b, mid, f
    out = np.empty(n)
    ok = np.ones(n, dtype=np.bool_)
    cdef double[::1] out_v = out
    cdef unsigned char[::1] ok_v = ok.view(np.uint8)
    with nogil:
        for i in range(n):
            a = lo
            b = hi
            if not ((1.0 - p1) * _expit(b0[i] + a) + p1 * _expit(b0[i] + a + b1[i]) - incidence < 0.0
                    and (1.0 - p1) * _expit(b0[i] + b) + p1 * _expit(b0[i] + b + b1[i]) - incidence > 0.0):
                ok_v[i] = 0
            for it in range(max_iter):
                mid = 0.5 * (a + b)
                if mid == a or mid == b:
                    break
                f = (1.0 - p1) * _expit(b0[i] + mid) + p1 * _expit(b0[i] + mid + b1[i]) - incidence
                if f < 0.0:
                    a = mid
                else:
                    b = mid
            out_v[i] = 0.5 * (a + b)
    return out, ok


def rd_draws(const double[::1] b0, const double[::1] b1, const double[::1] offsets,
             double incidence, double p1):
    """Risk differences and calibration residuals for each draw."""
    cdef Py_ssize_t n = b0.shape[0]
    cdef Py_ssize_t i
    cdef double low, high
    rd = np.empty(n)
    resid = np.empty(n)
    cdef double[::1] rd_v = rd
    cdef double[::1] resid_v = resid
    with nogil:
        for i in range(n):
            low = _expit(b0[i] + offsets[i])
            high = _expit(b0[i] + offsets[i] + b1[i])
            rd_v[i] = high - low
            resid_v[i] = (1.0 - p1) * low + p1 * high - incidence
    return rd, resid
