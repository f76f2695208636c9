# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernel primitives.

Mirrors gmi._pycore function for function; selected at import by
gmi.backend when the build succeeded. Pairwise squared distances are
accumulated term by term (never via the norm-expansion shortcut), which
keeps them exact for nearby points at any scale.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _sqdist(const double[:, ::1] X, Py_ssize_t i,
                           const double[:, ::1] Y, Py_ssize_t j) nogil:
    cdef double s = 0.0, t
    cdef Py_ssize_t k
    for k in range(X.shape[1]):
        t = X[i, k] - Y[j, k]
        s += t * t
    return s


def pairwise_sq_dists(const double[:, ::1] X, const double[:, ::1] Y):
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], i, j
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                out[i, j] = _sqdist(X, i, Y, j)
    return out_arr


def rbf_gram(const double[:, ::1] X, const double[:, ::1] Y, double gamma):
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], i, j
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                out[i, j] = exp(-gamma * _sqdist(X, i, Y, j))
    return out_arr


def rbf_to_point(const double[:, ::1] X, const double[::1] y, double gamma):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, k
    cdef double s, t
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(d):
                t = X[i, k] - y[k]
                s += t * t
            out[i] = exp(-gamma * s)
    return out_arr


def expansion_sq_distance(const double[:, ::1] X, const double[::1] a,
                          const double[:, ::1] Y, const double[::1] b,
                          double gamma):
    """Squared RKHS norm of sum_i a_i k(x_i,.) - sum_j b_j k(y_j,.)."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], i, j
    cdef double kxx = 0.0, kyy = 0.0, kxy = 0.0, row
    with nogil:
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += a[j] * exp(-gamma * _sqdist(X, i, X, j))
            kxx += a[i] * row
        for i in range(m):
            row = 0.0
            for j in range(m):
                row += b[j] * exp(-gamma * _sqdist(Y, i, Y, j))
            kyy += b[i] * row
        for i in range(n):
            row = 0.0
            for j in range(m):
                row += b[j] * exp(-gamma * _sqdist(X, i, Y, j))
            kxy += a[i] * row
    return kxx - 2.0 * kxy + kyy


def cosine_weights(const double[:, ::1] Q, const double[::1] q):
    cdef Py_ssize_t n = Q.shape[0], d = Q.shape[1], i, k
    cdef double qn = 0.0, dot, nrm
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for k in range(d):
            qn += q[k] * q[k]
        qn = qn ** 0.5
        for i in range(n):
            dot = 0.0
            nrm = 0.0
            for k in range(d):
                dot += Q[i, k] * q[k]
                nrm += Q[i, k] * Q[i, k]
            out[i] = dot / (nrm ** 0.5 * qn)
    return out_arr
