# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: reduced Bethe system, batched Newton, forest sums.

Same algorithms as ``_purepy``; the Newton batch releases the GIL so the
caller can spread chunks over threads.
"""
import numpy as np

from libc.stdlib cimport malloc, free

cdef extern from "complex.h" nogil:
    double cabs(double complex)

BACKEND = "compiled"

DEF MAXN = 16


cdef inline double complex ipow(double complex z, int n) noexcept nogil:
    cdef double complex r = 1.0
    while n > 0:
        if n & 1:
            r = r * z
        z = z * z
        n >>= 1
    return r


cdef void system_c(const double complex* xi, int n, double complex p, int L,
                   double complex* g, double complex* jac, bint want_jac) noexcept nogil:
    cdef double complex q = 1.0 - p
    cdef double sgn = -1.0 if n % 2 else 1.0
    cdef double complex d[MAXN]
    cdef double complex u[MAXN]
    cdef double complex pd, pu, xl, dd, du, td, tu
    cdef int j, i, k, m
    for j in range(n):
        for i in range(n):
            d[i] = p + q * xi[j] * xi[i] - xi[i]
            u[i] = p + q * xi[j] * xi[i] - xi[j]
        pd = 1.0
        pu = 1.0
        for i in range(n):
            if i != j:
                pd = pd * d[i]
                pu = pu * u[i]
        xl = ipow(xi[j], L)
        g[j] = xl * pd + sgn * pu
        if not want_jac:
            continue
        dd = 0.0
        du = 0.0
        for i in range(n):
            if i == j:
                continue
            td = 1.0
            tu = 1.0
            for m in range(n):
                if m != j and m != i:
                    td = td * d[m]
                    tu = tu * u[m]
            dd = dd + q * xi[i] * td
            du = du + (q * xi[i] - 1.0) * tu
            # off-diagonal entry for k = i shares the same partial products
            jac[j * n + i] = xl * (q * xi[j] - 1.0) * td + sgn * q * xi[j] * tu
        jac[j * n + j] = L * ipow(xi[j], L - 1) * pd + xl * dd + sgn * du


cdef double max_abs(const double complex* v, int n) noexcept nogil:
    cdef double m = 0.0, a
    cdef int i
    for i in range(n):
        a = cabs(v[i])
        if a > m:
            m = a
    return m


cdef bint solve_c(double complex* a, double complex* b, double complex* x, int n,
                  double threshold) noexcept nogil:
    """Gaussian elimination with partial pivoting, in place. False if singular."""
    cdef double scale = 0.0, best, v
    cdef int k, i, c, piv
    cdef double complex f, tmp
    for i in range(n * n):
        v = cabs(a[i])
        if v > scale:
            scale = v
    if scale == 0.0:
        return False
    for k in range(n):
        piv = k
        best = cabs(a[k * n + k])
        for i in range(k + 1, n):
            v = cabs(a[i * n + k])
            if v > best:
                best = v
                piv = i
        if best < threshold * scale:
            return False
        if piv != k:
            for c in range(n):
                tmp = a[k * n + c]
                a[k * n + c] = a[piv * n + c]
                a[piv * n + c] = tmp
            tmp = b[k]
            b[k] = b[piv]
            b[piv] = tmp
        for i in range(k + 1, n):
            f = a[i * n + k] / a[k * n + k]
            for c in range(k, n):
                a[i * n + c] = a[i * n + c] - f * a[k * n + c]
            b[i] = b[i] - f * b[k]
    for k in range(n - 1, -1, -1):
        f = b[k]
        for c in range(k + 1, n):
            f = f - a[k * n + c] * x[c]
        x[k] = f / a[k * n + k]
    return True


cdef int newton_c(double complex* x, int n, double complex p, int L, int max_iter,
                  double tol, double step_tol, int max_halvings, double pivot) noexcept nogil:
    cdef double complex r[MAXN]
    cdef double complex rt[MAXN]
    cdef double complex rhs[MAXN]
    cdef double complex dx[MAXN]
    cdef double complex xn[MAXN]
    cdef double complex jac[MAXN * MAXN]
    cdef double rn, xmax, t, xmin, a, lim
    cdef int it, h, i
    for it in range(max_iter):
        system_c(x, n, p, L, r, jac, True)
        rn = max_abs(r, n)
        for i in range(n):
            rhs[i] = -r[i]
        if not solve_c(jac, rhs, dx, n, pivot):
            return 2
        xmax = max_abs(x, n)
        lim = 1.0
        if xmax > 1.0:
            lim = ipow(xmax, L).real
        if rn <= tol * lim and max_abs(dx, n) <= step_tol * (1.0 + xmax):
            for i in range(n):
                x[i] = x[i] + dx[i]
            return 0
        t = 1.0
        for h in range(max_halvings + 1):
            for i in range(n):
                xn[i] = x[i] + t * dx[i]
            system_c(xn, n, p, L, rt, jac, False)
            if max_abs(rt, n) < rn:
                break
            t *= 0.5
        xmin = 1e300
        for i in range(n):
            x[i] = xn[i]
            a = cabs(x[i])
            if a < xmin:
                xmin = a
        if max_abs(x, n) > 1e8 or xmin < 1e-8:
            return 1
    return 1


def reduced_system(xi, p, int L):
    cdef double complex[::1] x = np.ascontiguousarray(xi, dtype=complex)
    cdef int n = x.shape[0]
    if n > MAXN:
        raise ValueError("too many particles for the compiled kernel")
    g = np.empty(n, dtype=complex)
    jac = np.empty((n, n), dtype=complex)
    cdef double complex[::1] gv = g
    cdef double complex[:, ::1] jv = jac
    system_c(&x[0], n, p, L, &gv[0], &jv[0, 0], True)
    return g, jac


def newton_batch(starts, p, int L, int max_iter=80, double tol=1e-11,
                 double step_tol=1e-10, int max_halvings=20, double pivot=1e-13):
    out = np.array(starts, dtype=complex, order="C", copy=True)
    cdef double complex[:, ::1] xv = out
    cdef Py_ssize_t count = xv.shape[0], k
    cdef int n = xv.shape[1]
    if n > MAXN:
        raise ValueError("too many particles for the compiled kernel")
    status = np.empty(count, dtype=np.int8)
    cdef signed char[::1] sv = status
    cdef double complex pc = p
    with nogil:
        for k in range(count):
            sv[k] = newton_c(&xv[k, 0], n, pc, L, max_iter, tol, step_tol, max_halvings, pivot)
    return out, status


cdef bint closes_cycle(int* parent, int v) noexcept nogil:
    cdef int u = parent[v]
    while u != -1 and u <= v:
        if u == v:
            return True
        u = parent[u]
    return False


def forest_polynomial(sizes, root_only):
    """Sum of m(f) over planted forests, bucketed by number of roots."""
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef signed char[::1] ro = np.ascontiguousarray(root_only, dtype=np.int8)
    cdef int n = sz.shape[0]
    coeffs = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] cv = coeffs
    if n == 0:
        coeffs[0] = 1
        return coeffs
    cdef int* parent = <int*> malloc(n * sizeof(int))
    cdef int* choice = <int*> malloc(n * sizeof(int))
    cdef long long* weight = <long long*> malloc((n + 1) * sizeof(long long))
    cdef int* roots = <int*> malloc((n + 1) * sizeof(int))
    cdef int v, c
    try:
        with nogil:
            # choice[v] = -1 means root, otherwise the parent index; iterate
            # depth first over all parent functions, pruning cycles.
            for v in range(n):
                parent[v] = -1
                choice[v] = -2
            weight[0] = 1
            roots[0] = 0
            v = 0
            while v >= 0:
                if v == n:
                    cv[roots[n]] += weight[n]
                    v -= 1
                    continue
                c = choice[v] + 1
                if c >= 0 and ro[v]:
                    c = n
                while 0 <= c < n and (c == v or not _try(parent, v, c)):
                    c += 1
                if c >= n:
                    choice[v] = -2
                    parent[v] = -1
                    v -= 1
                    continue
                choice[v] = c
                parent[v] = c
                if c == -1:
                    weight[v + 1] = weight[v]
                    roots[v + 1] = roots[v] + 1
                else:
                    weight[v + 1] = weight[v] * sz[c]
                    roots[v + 1] = roots[v]
                v += 1
    finally:
        free(parent)
        free(choice)
        free(weight)
        free(roots)
    return coeffs


cdef inline bint _try(int* parent, int v, int c) noexcept nogil:
    parent[v] = c
    if closes_cycle(parent, v):
        parent[v] = -1
        return False
    return True
