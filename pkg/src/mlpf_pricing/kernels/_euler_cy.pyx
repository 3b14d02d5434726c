# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython Euler propagation kernels (hot-path backend).

Mirrors kernels/_euler_np.py expression for expression; together with
-ffp-contract=off at compile time this keeps the two backends
bit-identical.
"""

from libc.math cimport fabs, sqrt

import numpy as np

cdef double PRICE_FLOOR = 1e-12

cdef int GBM_KIND = 0
cdef int LANGEVIN_KIND = 1


cdef void _steps_gbm(double[::1] s, double[:, ::1] w,
                     double r, double sigma,
                     double h, double sqrt_h) noexcept nogil:
    cdef Py_ssize_t i, m
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t n_steps = w.shape[1]
    cdef double si
    for i in range(n):
        si = s[i]
        for m in range(n_steps):
            si = si + r * si * h + sigma * si * sqrt_h * w[i, m]
            if si < PRICE_FLOOR:
                si = PRICE_FLOOR
        s[i] = si


cdef void _steps_langevin(double[::1] s, double[::1] v,
                          double[:, ::1] w, double[:, ::1] b,
                          double r, double sigma, double beta, double dof,
                          double h, double sqrt_h) noexcept nogil:
    cdef Py_ssize_t i, m
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t n_steps = w.shape[1]
    cdef double si, vi, s_new, v_new
    for i in range(n):
        si = s[i]
        vi = v[i]
        for m in range(n_steps):
            s_new = si + r * si * h + fabs(sigma * vi * si) * sqrt_h * w[i, m]
            v_new = vi + 0.5 * (-(dof + 1.0) * vi / (dof + vi * vi)) * h + beta * sqrt_h * b[i, m]
            if s_new < PRICE_FLOOR:
                s_new = PRICE_FLOOR
            si = s_new
            vi = v_new
        s[i] = si
        v[i] = vi


def _steps(s, v, w, b, kind, params, double h, double sqrt_h):
    cdef double[::1] s_mv = s
    cdef double[::1] v_mv
    cdef double[:, ::1] w_mv = w
    cdef double[:, ::1] b_mv
    cdef double r, sigma, beta, dof
    if kind == GBM_KIND:
        r, sigma = params
        with nogil:
            _steps_gbm(s_mv, w_mv, r, sigma, h, sqrt_h)
    elif kind == LANGEVIN_KIND:
        r, sigma, beta, dof = params
        v_mv = v
        b_mv = b
        with nogil:
            _steps_langevin(s_mv, v_mv, w_mv, b_mv, r, sigma, beta, dof, h, sqrt_h)
    else:
        raise ValueError(f"unknown model kind {kind}")


def propagate(s, v, w, b, kind, params, double h):
    """Advance particle arrays (s, v) in place by w.shape[1] steps of size h."""
    _steps(s, v, w, b, kind, params, h, sqrt(h))


def propagate_coupled(sf, vf, sc, vc, w, b, kind, params, double h_fine):
    """Advance a coupled fine/coarse pair in place over one segment.

    Same contract as the NumPy backend: the coarse chain steps at
    2*h_fine, driven by sqrt(h_fine) * (W(2m) + W(2m+1)).
    """
    if w.shape[1] % 2 != 0:
        raise ValueError("coupled propagation needs an even number of fine steps")
    _steps(sf, vf, w, b, kind, params, h_fine, sqrt(h_fine))
    w2 = np.ascontiguousarray(w[:, 0::2] + w[:, 1::2])
    b2 = np.ascontiguousarray(b[:, 0::2] + b[:, 1::2]) if b is not None else None
    _steps(sc, vc, w2, b2, kind, params, 2.0 * h_fine, sqrt(h_fine))
