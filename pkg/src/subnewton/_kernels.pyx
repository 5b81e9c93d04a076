# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the projection / projected-quadratic kernels.

Same contracts as _kernels_py; the win is removing per-iteration Python
overhead from the inner loop of the constrained model solve.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

KIND_L1 = 1
KIND_BOX = 2


cdef int _cmp_desc(const void *pa, const void *pb) noexcept nogil:
    cdef double a = (<const double *> pa)[0]
    cdef double b = (<const double *> pb)[0]
    if a < b:
        return 1
    if a > b:
        return -1
    return 0


cdef void _l1_inplace(double *v, Py_ssize_t p, double radius, double *work) noexcept nogil:
    cdef Py_ssize_t i, rho = 0
    cdef double total = 0.0, css = 0.0, css_rho = 0.0, theta, mag, sign
    for i in range(p):
        work[i] = fabs(v[i])
        total += work[i]
    if total <= radius:
        return
    qsort(work, p, sizeof(double), _cmp_desc)
    for i in range(p):
        css += work[i]
        if work[i] - (css - radius) / (i + 1.0) > 0.0:
            rho = i
            css_rho = css
    theta = (css_rho - radius) / (rho + 1.0)
    for i in range(p):
        mag = fabs(v[i]) - theta
        if mag < 0.0:
            mag = 0.0
        sign = 1.0 if v[i] > 0.0 else -1.0
        v[i] = sign * mag


cdef void _box_inplace(double *v, Py_ssize_t p, const double *lo, const double *hi) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(p):
        if v[i] < lo[i]:
            v[i] = lo[i]
        elif v[i] > hi[i]:
            v[i] = hi[i]


def project_l1(v, double radius):
    """Euclidean projection onto {z : ||z||_1 <= radius} (sort-based, exact)."""
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    out = np.array(v, dtype=np.float64, copy=True)
    cdef double[::1] ov = out
    cdef Py_ssize_t p = ov.shape[0]
    cdef double *work = <double *> malloc(p * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        _l1_inplace(&ov[0], p, radius, work)
    finally:
        free(work)
    return out


def project_box(v, lower, upper):
    """Euclidean projection onto {z : lower <= z <= upper}."""
    out = np.array(v, dtype=np.float64, copy=True)
    lo = np.ascontiguousarray(np.broadcast_to(lower, out.shape), dtype=np.float64)
    hi = np.ascontiguousarray(np.broadcast_to(upper, out.shape), dtype=np.float64)
    cdef double[::1] ov = out
    cdef const double[::1] lv = lo
    cdef const double[::1] hv = hi
    _box_inplace(&ov[0], ov.shape[0], &lv[0], &hv[0])
    return out


cdef inline void _apply_projection(double *v, Py_ssize_t p, int kind, double radius,
                                   const double *lo, const double *hi,
                                   double *work) noexcept nogil:
    if kind == 1:
        _l1_inplace(v, p, radius, work)
    else:
        _box_inplace(v, p, lo, hi)


def solve_projected_quadratic(xk, g, hessian, double lipschitz, int kind,
                              double radius, lower, upper, double tol, long max_iter):
    """Accelerated projected gradient on the quadratic model; see the
    pure-Python twin for the full contract."""
    if not lipschitz > 0.0:
        raise ValueError(f"lipschitz constant must be positive, got {lipschitz!r}")
    if kind != 1 and kind != 2:
        raise ValueError(f"unknown constraint kind {kind!r}")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] xk_a = np.ascontiguousarray(xk, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_a = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] h_a = np.ascontiguousarray(hessian, dtype=np.float64)
    cdef Py_ssize_t p = xk_a.shape[0]

    lo_arr = np.ascontiguousarray(
        np.broadcast_to(0.0 if lower is None else lower, (p,)), dtype=np.float64
    )
    hi_arr = np.ascontiguousarray(
        np.broadcast_to(0.0 if upper is None else upper, (p,)), dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo_a = lo_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hi_a = hi_arr

    cdef cnp.ndarray[cnp.float64_t, ndim=1] z_a = xk_a.copy()
    cdef double *xkp = &xk_a[0]
    cdef double *gp = &g_a[0]
    cdef double *hp = &h_a[0, 0]
    cdef double *lop = &lo_a[0]
    cdef double *hip = &hi_a[0]
    cdef double *zp = &z_a[0]

    cdef double *y = <double *> malloc(5 * p * sizeof(double))
    if y == NULL:
        raise MemoryError()
    cdef double *znew = y + p
    cdef double *grad = y + 2 * p
    cdef double *cand = y + 3 * p
    cdef double *work = y + 4 * p

    cdef Py_ssize_t i, j
    cdef long iters = 0
    cdef double t = 1.0, t_new, resid = 0.0, s, diff, restart_dot
    cdef double lip = lipschitz

    try:
        with nogil:
            _apply_projection(zp, p, kind, radius, lop, hip, work)
            for i in range(p):
                y[i] = zp[i]
            resid = tol + 1.0
            while iters < max_iter:
                iters += 1
                # znew = P(y - (g + H(y - xk)) / lip)
                for i in range(p):
                    s = gp[i]
                    for j in range(p):
                        s += hp[i * p + j] * (y[j] - xkp[j])
                    znew[i] = y[i] - s / lip
                _apply_projection(znew, p, kind, radius, lop, hip, work)
                # residual: lip * ||znew - P(znew - (g + H(znew - xk)) / lip)||
                for i in range(p):
                    s = gp[i]
                    for j in range(p):
                        s += hp[i * p + j] * (znew[j] - xkp[j])
                    cand[i] = znew[i] - s / lip
                _apply_projection(cand, p, kind, radius, lop, hip, work)
                resid = 0.0
                for i in range(p):
                    diff = znew[i] - cand[i]
                    resid += diff * diff
                resid = lip * sqrt(resid)
                if resid <= tol:
                    for i in range(p):
                        zp[i] = znew[i]
                    break
                restart_dot = 0.0
                for i in range(p):
                    restart_dot += (y[i] - znew[i]) * (znew[i] - zp[i])
                if restart_dot > 0.0:
                    t_new = 1.0
                    for i in range(p):
                        y[i] = znew[i]
                else:
                    t_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
                    for i in range(p):
                        y[i] = znew[i] + ((t - 1.0) / t_new) * (znew[i] - zp[i])
                for i in range(p):
                    zp[i] = znew[i]
                t = t_new
    finally:
        free(y)

    return z_a, int(iters), float(resid)
