# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; :mod:`hwaves._pykernels` holds the NumPy equivalents."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, cosh, M_PI

cnp.import_array()


cdef extern from "_bim_row.h":
    void hw_kernel_row(
        double* R, double* I, const double* sat, const double* cat, const double* cot,
        const double* S, const double* C, const double* hx,
        Py_ssize_t i, Py_ssize_t j0, Py_ssize_t j1, Py_ssize_t shift,
    ) nogil


def bim_kernel_parts(double[::1] h, double[::1] hx, double[::1] hxx, out=None,
                     double scale=1.0, double im_shift=0.0):
    """Real and imaginary parts of ``K[i, j] = K(alpha_i, alpha_j)`` for the graph ``alpha + i h``.

    With ``sa, ca = sin, cos(pi (j - i) / M)``, ``sh, ch = sinh, cosh((h_j - h_i) / 2)``,
    ``D = sa^2 + sh^2`` and ``p = h'_j``:
    ``Im K = (p sa ca - sh ch) / 2D`` and ``Re K = (p sh ch - ca sh^2 / sa) / 2D``.
    ``out`` may supply a pair of C-contiguous ``(M, M)`` buffers to fill.  Both
    parts are multiplied by ``scale`` and ``im_shift`` is added to the diagonal
    of the imaginary part.
    """
    cdef Py_ssize_t M = h.shape[0]
    cdef Py_ssize_t i, d
    cdef double q
    if out is None:
        re_out = np.empty((M, M))
        im_out = np.empty((M, M))
    else:
        re_out, im_out = out
    cdef double[:, ::1] R = re_out
    cdef double[:, ::1] I = im_out
    cdef double[::1] sat = np.empty(M)
    cdef double[::1] cat = np.empty(M)
    cdef double[::1] cot = np.empty(M)
    cdef double[::1] S = np.empty(M)
    cdef double[::1] C = np.empty(M)
    cdef double[::1] hxc = hx
    sat[0] = 1.0
    cat[0] = 1.0
    cot[0] = 1.0
    for d in range(1, M):
        sat[d] = sin(M_PI * d / M)
        cat[d] = cos(M_PI * d / M)
        cot[d] = cat[d] / sat[d]
    for i in range(M):
        S[i] = sinh(0.5 * h[i])
        C[i] = cosh(0.5 * h[i])
    for i in range(M):
        hw_kernel_row(&R[i, 0], &I[i, 0], &sat[0], &cat[0], &cot[0], &S[0], &C[0], &hxc[0],
                    i, 0, i, M)
        hw_kernel_row(&R[i, 0], &I[i, 0], &sat[0], &cat[0], &cot[0], &S[0], &C[0], &hxc[0],
                    i, i + 1, M, 0)
        q = 2.0 * (1.0 + hx[i] * hx[i])
        R[i, i] = hxx[i] * hx[i] / q
        I[i, i] = hxx[i] / q
        if scale != 1.0:
            for d in range(M):
                R[i, d] *= scale
                I[i, d] *= scale
        I[i, i] += im_shift
    return re_out, im_out


def bim_kernel(double[::1] h, double[::1] hx, double[::1] hxx):
    """Complex boundary-integral kernel; see :func:`bim_kernel_parts`."""
    re, im = bim_kernel_parts(h, hx, hxx)
    out = np.empty(re.shape, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def conv_direct(const double complex[:, ::1] a, const double complex[:, ::1] b, Py_ssize_t half):
    """Batched two-sided convolution truncated to indices ``-half..half``.

    ``a`` and ``b`` have shape ``(T, 2*half + 1)`` with index ``half`` holding
    mode 0.  Row ``t`` of the result is ``sum_m a[t, l - m] b[t, m]``.
    """
    cdef Py_ssize_t T = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t t, l, m, lo, hi
    out = np.zeros((T, n), dtype=np.complex128)
    cdef double complex[:, ::1] c = out
    cdef double complex acc
    for t in range(T):
        for l in range(-half, half + 1):
            lo = l - half if l - half > -half else -half
            hi = l + half if l + half < half else half
            acc = 0
            for m in range(lo, hi + 1):
                acc = acc + a[t, l - m + half] * b[t, m + half]
            c[t, l + half] = acc
    return out
