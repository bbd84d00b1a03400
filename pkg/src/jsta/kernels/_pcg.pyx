# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid-Laplacian kernels (same contracts as ``_fallback``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef void _matvec(const double[:, ::1] wa, const double[:, ::1] wb,
                  const double[:, ::1] x, double[:, ::1] y) noexcept nogil:
    cdef Py_ssize_t na = x.shape[0], nb = x.shape[1], i, j
    cdef double f
    for i in range(na):
        for j in range(nb):
            y[i, j] = 0.0
    for i in range(na - 1):
        for j in range(nb):
            f = wa[i, j] * (x[i + 1, j] - x[i, j])
            y[i, j] -= f
            y[i + 1, j] += f
    for i in range(na):
        for j in range(nb - 1):
            f = wb[i, j] * (x[i, j + 1] - x[i, j])
            y[i, j] -= f
            y[i, j + 1] += f


def laplacian_matvec(wa, wb, x):
    cdef double[:, ::1] wa_ = np.ascontiguousarray(wa, dtype=np.float64)
    cdef double[:, ::1] wb_ = np.ascontiguousarray(wb, dtype=np.float64)
    cdef double[:, ::1] x_ = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(np.asarray(x_))
    cdef double[:, ::1] y_ = out
    with nogil:
        _matvec(wa_, wb_, x_, y_)
    return out


def pcg_laplacian(wa, wb, b, x0, double tol, Py_ssize_t maxiter):
    cdef double[:, ::1] wa_ = np.ascontiguousarray(wa, dtype=np.float64)
    cdef double[:, ::1] wb_ = np.ascontiguousarray(wb, dtype=np.float64)
    cdef double[:, ::1] b_ = np.ascontiguousarray(b, dtype=np.float64)
    xa = np.array(x0, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] x = xa
    cdef Py_ssize_t na = b_.shape[0], nb = b_.shape[1], i, j, it = 0
    cdef double[:, ::1] r = np.empty((na, nb))
    cdef double[:, ::1] z = np.empty((na, nb))
    cdef double[:, ::1] p = np.empty((na, nb))
    cdef double[:, ::1] q = np.empty((na, nb))
    cdef double[:, ::1] inv = np.zeros((na, nb))
    cdef double d, bnorm = 0.0, rnorm, rz, rz_new, pq, alpha, beta

    with nogil:
        for i in range(na):
            for j in range(nb):
                d = 0.0
                if i > 0:
                    d += wa_[i - 1, j]
                if i < na - 1:
                    d += wa_[i, j]
                if j > 0:
                    d += wb_[i, j - 1]
                if j < nb - 1:
                    d += wb_[i, j]
                if d > 0:
                    inv[i, j] = 1.0 / d
                bnorm += b_[i, j] * b_[i, j]
        bnorm = sqrt(bnorm)
    if bnorm == 0.0:
        return np.zeros((na, nb)), 0, 0.0

    with nogil:
        _matvec(wa_, wb_, x, q)
        rz = 0.0
        rnorm = 0.0
        for i in range(na):
            for j in range(nb):
                r[i, j] = b_[i, j] - q[i, j]
                z[i, j] = inv[i, j] * r[i, j]
                p[i, j] = z[i, j]
                rz += r[i, j] * z[i, j]
                rnorm += r[i, j] * r[i, j]
        rnorm = sqrt(rnorm)
        while rnorm > tol * bnorm and it < maxiter:
            _matvec(wa_, wb_, p, q)
            pq = 0.0
            for i in range(na):
                for j in range(nb):
                    pq += p[i, j] * q[i, j]
            if pq <= 0.0:
                break
            alpha = rz / pq
            rz_new = 0.0
            rnorm = 0.0
            for i in range(na):
                for j in range(nb):
                    x[i, j] += alpha * p[i, j]
                    r[i, j] -= alpha * q[i, j]
                    z[i, j] = inv[i, j] * r[i, j]
                    rz_new += r[i, j] * z[i, j]
                    rnorm += r[i, j] * r[i, j]
            rnorm = sqrt(rnorm)
            beta = rz_new / rz
            rz = rz_new
            for i in range(na):
                for j in range(nb):
                    p[i, j] = z[i, j] + beta * p[i, j]
            it += 1
    return xa, it, rnorm / bnorm
