"""Pure-Python reference implementation of the hot kernels.

Mirrors ``_kernels.pyx`` operation for operation so both backends give the
same answers up to floating-point rounding.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"

CONVERGED, NO_CONVERGENCE, SINGULAR = 0, 1, 2


def reduced_system(xi, p: complex, L: int):
    """Bethe system with the common diagonal factor removed.

    g_j = xi_j^L prod_{i != j} D_ji + (-1)^N prod_{i != j} U_ji with
    D_ji = p + q xi_j xi_i - xi_i and U_ji = p + q xi_j xi_i - xi_j.
    """
    xi = np.asarray(xi, dtype=complex)
    n = xi.size
    q = 1 - p
    sgn = -1.0 if n % 2 else 1.0
    prod = xi[:, None] * xi[None, :]
    d = p + q * prod - xi[None, :]
    u = p + q * prod - xi[:, None]
    g = np.empty(n, dtype=complex)
    jac = np.empty((n, n), dtype=complex)
    for j in range(n):
        others = [i for i in range(n) if i != j]
        pd = np.prod(d[j, others])
        pu = np.prod(u[j, others])
        xl = xi[j] ** L
        g[j] = xl * pd + sgn * pu
        dd = 0j
        du = 0j
        for i in others:
            rest = [m for m in others if m != i]
            dd += q * xi[i] * np.prod(d[j, rest])
            du += (q * xi[i] - 1) * np.prod(u[j, rest])
        jac[j, j] = L * xi[j] ** (L - 1) * pd + xl * dd + sgn * du
        for k in others:
            rest = [m for m in others if m != k]
            jac[j, k] = (xl * (q * xi[j] - 1) * np.prod(d[j, rest])
                         + sgn * q * xi[j] * np.prod(u[j, rest]))
    return g, jac


def _solve(a, b, threshold):
    a = a.copy()
    b = b.copy()
    n = b.size
    scale = np.abs(a).max()
    if scale == 0:
        return None
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) < threshold * scale:
            return None
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            a[i, k:] -= f * a[k, k:]
            b[i] -= f * b[k]
    x = np.empty(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def newton_one(start, p, L, max_iter, tol, step_tol, max_halvings, pivot):
    x = np.array(start, dtype=complex)
    for _ in range(max_iter):
        r, jac = reduced_system(x, p, L)
        rn = np.abs(r).max()
        dx = _solve(jac, -r, pivot)
        if dx is None:
            return x, SINGULAR
        xmax = np.abs(x).max()
        if rn <= tol * max(1.0, xmax ** L) and np.abs(dx).max() <= step_tol * (1 + xmax):
            return x + dx, CONVERGED
        t = 1.0
        for _ in range(max_halvings + 1):
            xn = x + t * dx
            if np.abs(reduced_system(xn, p, L)[0]).max() < rn:
                break
            t *= 0.5
        x = xn
        a = np.abs(x)
        if a.max() > 1e8 or a.min() < 1e-8:
            return x, NO_CONVERGENCE
    return x, NO_CONVERGENCE


def newton_batch(starts, p, L, max_iter=80, tol=1e-11, step_tol=1e-10,
                 max_halvings=20, pivot=1e-13):
    """Run :func:`newton_one` from each row of ``starts``."""
    starts = np.asarray(starts, dtype=complex)
    out = np.empty_like(starts)
    status = np.empty(starts.shape[0], dtype=np.int8)
    for k in range(starts.shape[0]):
        out[k], status[k] = newton_one(starts[k], complex(p), int(L), max_iter, tol,
                                       step_tol, max_halvings, pivot)
    return out, status


def forest_polynomial(sizes, root_only):
    """Coefficients c[k] = sum of m(f) over planted forests with k roots.

    Vertices flagged ``root_only`` never receive a parent. The multiplicity
    m(f) multiplies the size of the parent over all edges.
    """
    sizes = [int(s) for s in sizes]
    root_only = [bool(r) for r in root_only]
    n = len(sizes)
    coeffs = [0] * (n + 1)
    parent = [-1] * n

    def visit(v, weight, roots):
        if v == n:
            coeffs[roots] += weight
            return
        parent[v] = -1
        visit(v + 1, weight, roots + 1)
        if root_only[v]:
            return
        for u in range(n):
            if u == v:
                continue
            parent[v] = u
            if not _closes_cycle(parent, v):
                visit(v + 1, weight * sizes[u], roots)
        parent[v] = -1

    visit(0, 1, 0)
    return np.array(coeffs, dtype=np.int64)


def _closes_cycle(parent, v):
    """True when following parents from ``v`` through assigned vertices returns to ``v``."""
    u = parent[v]
    while u != -1 and u <= v:
        if u == v:
            return True
        u = parent[u]
    return False
