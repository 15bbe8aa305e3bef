# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled shell-sum kernels. Mirrors ``_pykernels`` term for term."""

from libc.math cimport sqrt, exp, expm1


cdef inline double _excess(double d2, double r, double r2, int code) noexcept nogil:
    cdef double diff2 = d2 - r2
    cdef double d, dr
    if code == 0:
        return diff2
    d = sqrt(d2)
    dr = diff2 / (d + r)
    if code == 1:
        return dr
    if code == 2:
        return exp(r) * expm1(dr)
    return dr * (d2 + d * r + r2)


def shell_excess(const double[::1] xs, const double[::1] ys,
                 const long long[::1] ks, const long long[::1] ls,
                 double r, double r2, int code, double[::1] out):
    """out[i] = sum_j g(|point_ij - p|) - g(r) for a built-in g selected by ``code``."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = ks.shape[0]
    cdef Py_ssize_t i, j
    cdef double s, inv, px, py, acc, x
    if ys.shape[0] != n or out.shape[0] != n or ls.shape[0] != m:
        raise ValueError("shape mismatch")
    with nogil:
        for i in range(n):
            s = sqrt(ys[i])
            inv = 1.0 / s
            x = xs[i]
            acc = 0.0
            for j in range(m):
                px = (ks[j] + ls[j] * x) * inv - 0.5
                py = ls[j] * s - 0.5
                acc = acc + _excess(px * px + py * py, r, r2, code)
            out[i] = acc


def shell_norms(const double[::1] xs, const double[::1] ys,
                const long long[::1] ks, const long long[::1] ls,
                double[:, ::1] out):
    """out[i, j] = |point(x_i, y_i; k_j, l_j) - p|."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = ks.shape[0]
    cdef Py_ssize_t i, j
    cdef double s, inv, px, py, x
    if ys.shape[0] != n or out.shape[0] != n or out.shape[1] != m or ls.shape[0] != m:
        raise ValueError("shape mismatch")
    with nogil:
        for i in range(n):
            s = sqrt(ys[i])
            inv = 1.0 / s
            x = xs[i]
            for j in range(m):
                px = (ks[j] + ls[j] * x) * inv - 0.5
                py = ls[j] * s - 0.5
                out[i, j] = sqrt(px * px + py * py)
