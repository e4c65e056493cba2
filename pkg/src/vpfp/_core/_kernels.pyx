# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cubic gather along frequency columns and the
mode-coupling convolution.  Semantics must match kernels_np exactly."""

from libc.math cimport floor

import numpy as np

NAME = "cython"


def affine_gather(double complex[:, ::1] values, double a, double[::1] b,
                  double x0, double dx):
    """out[i, j] = interp(values[i, :]) at q = a*(x0 + j*dx) + b[i].

    4-point Lagrange cubic inside the grid, linear in the first/last cell,
    zero outside the window.
    """
    cdef Py_ssize_t M = values.shape[0]
    cdef Py_ssize_t N = values.shape[1]
    out_arr = np.zeros((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, jj
    cdef double q, s, f, cm1, c0, cp1, cp2
    for i in range(M):
        for j in range(N):
            q = a * (x0 + j * dx) + b[i]
            s = (q - x0) / dx
            jj = <Py_ssize_t>floor(s)
            f = s - jj
            if 1 <= jj <= N - 3:
                cm1 = -f * (f - 1.0) * (f - 2.0) / 6.0
                c0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
                cp1 = -(f + 1.0) * f * (f - 2.0) / 2.0
                cp2 = (f + 1.0) * f * (f - 1.0) / 6.0
                out[i, j] = (cm1 * values[i, jj - 1] + c0 * values[i, jj]
                             + cp1 * values[i, jj + 1] + cp2 * values[i, jj + 2])
            elif 0 <= jj <= N - 2:
                out[i, j] = (1.0 - f) * values[i, jj] + f * values[i, jj + 1]
            # else: outside the window -> 0
    return out_arr


def gather_points(double complex[::1] col, double[::1] q, double x0, double dx):
    """Cubic gather of a single column at arbitrary points q."""
    cdef Py_ssize_t N = col.shape[0]
    cdef Py_ssize_t P = q.shape[0]
    out_arr = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t p, jj
    cdef double s, f, cm1, c0, cp1, cp2
    for p in range(P):
        s = (q[p] - x0) / dx
        jj = <Py_ssize_t>floor(s)
        f = s - jj
        if 1 <= jj <= N - 3:
            cm1 = -f * (f - 1.0) * (f - 2.0) / 6.0
            c0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
            cp1 = -(f + 1.0) * f * (f - 2.0) / 2.0
            cp2 = (f + 1.0) * f * (f - 1.0) / 6.0
            out[p] = (cm1 * col[jj - 1] + c0 * col[jj]
                      + cp1 * col[jj + 1] + cp2 * col[jj + 2])
        elif 0 <= jj <= N - 2:
            out[p] = (1.0 - f) * col[jj] + f * col[jj + 1]
    return out_arr


def mode_convolve(double complex[:, ::1] h, double complex[::1] rho,
                  double[::1] eta):
    """Quadratic electric coupling: out[k] = -sum_{l!=0} rho[l]*(eta/l)*h[k-l].

    Rows are indexed k = row - K with K = (rows-1)//2; terms with |k-l| > K
    are dropped (mode truncation).
    """
    cdef Py_ssize_t M = h.shape[0]
    cdef Py_ssize_t N = h.shape[1]
    cdef Py_ssize_t K = (M - 1) // 2
    out_arr = np.zeros((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t ik, il, im, j
    cdef long l
    cdef double complex coef
    for ik in range(M):
        for il in range(M):
            l = il - K
            if l == 0:
                continue
            im = ik - il + K
            if im < 0 or im >= M:
                continue
            coef = -rho[il] / (<double>l)
            for j in range(N):
                out[ik, j] = out[ik, j] + coef * eta[j] * h[im, j]
    return out_arr
