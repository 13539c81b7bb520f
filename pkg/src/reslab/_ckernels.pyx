# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()


def exp_sum(freqs, weights, targets, times):
    cdef const double[:, ::1] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef const double complex[::1] w = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef const double[:, ::1] z = np.ascontiguousarray(targets, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t K = f.shape[0], P = z.shape[0], k, p
    cdef double[::1] mag = np.empty(K)
    cdef double ph, re, im, c, s
    out = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] o = out
    for k in range(K):
        mag[k] = sqrt(f[k, 0] * f[k, 0] + f[k, 1] * f[k, 1] + f[k, 2] * f[k, 2])
    for p in range(P):
        re = 0.0
        im = 0.0
        for k in range(K):
            ph = z[p, 0] * f[k, 0] + z[p, 1] * f[k, 1] + z[p, 2] * f[k, 2] + t[p] * mag[k]
            c = cos(ph)
            s = sin(ph)
            re += w[k].real * c - w[k].imag * s
            im += w[k].real * s + w[k].imag * c
        o[p] = re + 1j * im
    return out


cdef inline double _dot(double* a, double* b) nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def phase_minor_batch(xi, eta, int convention):
    cdef const double[:, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[:, ::1] E = np.ascontiguousarray(eta, dtype=np.float64)
    cdef Py_ssize_t K = X.shape[0], k, i, j
    A_arr = np.empty((K, 3, 3))
    F_arr = np.empty((K, 3, 3))
    cdef double[:, :, ::1] A = A_arr
    cdef double[:, :, ::1] F = F_arr
    cdef double x[3]
    cdef double y[3]
    cdef double th[3]
    cdef double e[3]
    cdef double r1[3]
    cdef double r2[3]
    cdef double px[3]
    cdef double pe[3]
    cdef double nx, ne, nt, nd, nr, et, v, nan = float("nan")
    cdef double* rows[3]
    for k in range(K):
        for i in range(3):
            x[i] = X[k, i]
            y[i] = E[k, i]
            th[i] = x[i] + y[i]
            e[i] = x[i] - y[i]
        nx = sqrt(_dot(x, x))
        ne = sqrt(_dot(y, y))
        nt = sqrt(_dot(th, th))
        nd = sqrt(_dot(e, e))
        if nx == 0 or ne == 0 or nt == 0 or nd == 0:
            for i in range(3):
                for j in range(3):
                    A[k, i, j] = nan
                    F[k, i, j] = nan
            continue
        for i in range(3):
            th[i] /= nt
            e[i] /= nd
        et = _dot(e, th)
        for i in range(3):
            r1[i] = e[i] - et * th[i]
        nr = sqrt(_dot(r1, r1))
        if not nr > 1e-14:
            for i in range(3):
                for j in range(3):
                    A[k, i, j] = nan
                    F[k, i, j] = nan
            continue
        for i in range(3):
            r1[i] /= nr
        r2[0] = th[1] * r1[2] - th[2] * r1[1]
        r2[1] = th[2] * r1[0] - th[0] * r1[2]
        r2[2] = th[0] * r1[1] - th[1] * r1[0]
        rows[0] = r1
        rows[1] = r2
        rows[2] = th
        for i in range(3):
            px[i] = _dot(rows[i], x) / nx
            pe[i] = _dot(rows[i], y) / ne
            for j in range(3):
                F[k, i, j] = rows[i][j]
        for i in range(3):
            for j in range(3):
                v = -px[i] * px[j] / nx - pe[i] * pe[j] / ne
                if i == j:
                    v += 1.0 / nx + 1.0 / ne
                    if convention == 1 and i < 2:
                        v -= 4.0 / nt
                A[k, i, j] = v
    return A_arr, F_arr
