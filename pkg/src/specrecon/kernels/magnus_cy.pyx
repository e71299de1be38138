# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled cell-exponential propagation kernel (see magnus_py for the
reference semantics)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef extern from "complex.h":
    double complex csqrt(double complex)
    double complex cexp(double complex)
    double cabs(double complex)

DEF GUARD = 1e300
cdef double SQRT3_12 = sqrt(3.0) / 12.0


def propagate(cnp.ndarray[cnp.complex128_t, ndim=1] qg1,
              cnp.ndarray[cnp.complex128_t, ndim=1] qg2,
              double h,
              cnp.ndarray[cnp.complex128_t, ndim=1] lam,
              cnp.ndarray[cnp.complex128_t, ndim=1] y0,
              cnp.ndarray[cnp.complex128_t, ndim=1] dy0,
              bint full=False):
    cdef Py_ssize_t m = qg1.shape[0]
    cdef Py_ssize_t nlam = lam.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex w1, w2, wbar, alpha, d2, d, e, ch, shd, la
    cdef double complex y, dy, ynew, h2a
    cdef double h2 = h * h
    cdef bint overflow = False

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] ty
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] tdy
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ey
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] edy
    if full:
        ty = np.empty((nlam, m + 1), dtype=np.complex128)
        tdy = np.empty((nlam, m + 1), dtype=np.complex128)
    else:
        ey = np.empty(nlam, dtype=np.complex128)
        edy = np.empty(nlam, dtype=np.complex128)

    for j in range(nlam):
        la = lam[j]
        y = y0[j]
        dy = dy0[j]
        if full:
            ty[j, 0] = y
            tdy[j, 0] = dy
        for i in range(m):
            w1 = qg1[i] - la
            w2 = qg2[i] - la
            wbar = 0.5 * (w1 + w2)
            alpha = (SQRT3_12 * h2) * (w1 - w2)
            d2 = alpha * alpha + h2 * wbar
            if cabs(d2) < 1e-6:
                shd = 1.0 + d2 / 6.0 + d2 * d2 / 120.0
                ch = 1.0 + d2 / 2.0 + d2 * d2 / 24.0
            else:
                d = csqrt(d2)
                e = cexp(d)
                ch = 0.5 * (e + 1.0 / e)
                shd = 0.5 * (e - 1.0 / e) / d
            h2a = shd * h
            ynew = (ch + shd * alpha) * y + h2a * dy
            dy = h2a * wbar * y + (ch - shd * alpha) * dy
            y = ynew
            if full:
                ty[j, i + 1] = y
                tdy[j, i + 1] = dy
            if (i & 255) == 255 and cabs(y) > GUARD:
                overflow = True
                break
        if overflow:
            break
        if cabs(y) > GUARD or y != y:
            overflow = True
            break
        if not full:
            ey[j] = y
            edy[j] = dy

    if full:
        return ty, tdy, overflow
    return ey, edy, overflow
