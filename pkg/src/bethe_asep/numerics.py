"""Dense complex linear algebra and root finding.

Matrices and vectors are plain numpy ``complex128`` arrays. Every routine
here is a pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateLeadingCoefficient,
    DimensionMismatch,
    NoConvergence,
    SingularJacobian,
    SingularMatrix,
)

PIVOT_THRESHOLD = 1e-13
CLUSTER_THRESHOLD = 1e-6

System = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class NewtonConfig:
    """Knobs for :func:`newton_solve`.

    ``step_tolerance`` is optional: when set, convergence additionally needs
    the last Newton step to be below ``step_tolerance * (1 + |x|)``. That
    rejects points crawling linearly towards a singular root, whose residual
    can dip under the tolerance long before they get there.
    """

    max_iterations: int = 60
    residual_tolerance: float = 1e-11
    step_damping: float = 1.0
    singular_jacobian_threshold: float = PIVOT_THRESHOLD
    step_tolerance: float | None = None
    max_halvings: int = 20

    def __post_init__(self):
        if self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.step_damping <= 1:
            raise ValueError("step_damping must lie in (0, 1]")


def _as_matrix(matrix) -> np.ndarray:
    a = np.array(matrix, dtype=complex, copy=True)
    if a.ndim != 2:
        raise DimensionMismatch("expected a 2-d matrix")
    return a


def lu_factor(matrix, threshold: float = PIVOT_THRESHOLD):
    """LU factorization with partial pivoting.

    Returns ``(lu, perm, sign)`` where ``lu`` packs the unit lower factor
    below the diagonal and ``perm[k]`` is the original row now at ``k``.
    """
    a = _as_matrix(matrix)
    n, m = a.shape
    if n != m:
        raise DimensionMismatch("matrix must be square")
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    perm = np.arange(n)
    sign = 1
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) < threshold * scale:
            raise SingularMatrix(f"pivot {k} below threshold")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
            sign = -sign
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, perm, sign


def lu_solve(matrix, rhs, threshold: float = PIVOT_THRESHOLD) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` by Gaussian elimination with partial pivoting."""
    b = np.asarray(rhs, dtype=complex)
    a = np.asarray(matrix)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionMismatch("rhs length must equal matrix rows")
    lu, perm, _ = lu_factor(a, threshold)
    n = lu.shape[0]
    y = b[perm].copy()
    for k in range(n):
        y[k] -= lu[k, :k] @ y[:k]
    for k in range(n - 1, -1, -1):
        y[k] = (y[k] - lu[k, k + 1:] @ y[k + 1:]) / lu[k, k]
    return y


def determinant(matrix) -> complex:
    try:
        lu, _, sign = lu_factor(matrix, threshold=0.0)
    except SingularMatrix:
        return 0j
    return complex(sign * np.prod(np.diag(lu)))


def rank_with_pivots(matrix, tolerance: float) -> tuple[int, np.ndarray]:
    """Full-pivoting elimination; returns the rank and the pivot magnitudes.

    Pivots are reported relative to the largest initial entry.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    a = _as_matrix(matrix)
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        return 0, np.zeros(0)
    pivots = []
    rows, cols = a.shape
    for k in range(min(rows, cols)):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        mag = sub[i, j] / scale
        if mag <= tolerance:
            break
        pivots.append(mag)
        i += k
        j += k
        a[[k, i]] = a[[i, k]]
        a[:, [k, j]] = a[:, [j, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return len(pivots), np.array(pivots)


def matrix_rank(matrix, tolerance: float) -> int:
    return rank_with_pivots(matrix, tolerance)[0]


def poly_eval(coefficients, z):
    """Horner evaluation of an ascending-degree coefficient vector."""
    acc = np.zeros_like(np.asarray(z, dtype=complex))
    for c in np.asarray(coefficients, dtype=complex)[::-1]:
        acc = acc * z + c
    return acc


def poly_roots(coefficients, max_iterations: int = 500,
               cluster_threshold: float = CLUSTER_THRESHOLD) -> np.ndarray:
    """All roots of an ascending-degree polynomial by Aberth-Ehrlich iteration.

    Multiple roots come back as clustered copies. Copies closer than
    ``cluster_threshold`` are snapped to one polished value.
    """
    a = np.asarray(coefficients, dtype=complex)
    if a.ndim != 1 or a.size < 2:
        raise DegenerateLeadingCoefficient("degree must be at least 1")
    scale = np.abs(a).max()
    if scale == 0 or abs(a[-1]) <= PIVOT_THRESHOLD * scale:
        raise DegenerateLeadingCoefficient("leading coefficient vanishes")
    # Exact zero roots are split off: they would put the initial circle at 0.
    nz = 0
    while a[nz] == 0:
        nz += 1
    b = a[nz:]
    d = b.size - 1
    if d == 0:
        return np.zeros(nz, dtype=complex)
    db = b[1:] * np.arange(1, d + 1)
    radius = abs(b[0] / b[-1]) ** (1.0 / d)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
    bscale = np.abs(b).max()
    done = False
    for _ in range(max_iterations):
        pz = poly_eval(b, z)
        dpz = poly_eval(db, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        repulse = (1.0 / diff).sum(axis=1) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * repulse)
        w = np.where(pz == 0, 0, w)
        if not np.all(np.isfinite(w)):
            # Perturb stalled iterates instead of giving up.
            bad = ~np.isfinite(w)
            w[bad] = 1e-3 * (1 + abs(z[bad]))
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * (1 + np.abs(z))):
            done = True
            break
    z = _merge_clusters(z, b, cluster_threshold)
    ok = np.abs(poly_eval(b, z)) <= 1e-9 * bscale * (1 + np.abs(z)) ** d
    if not np.all(ok) and not done:
        raise NoConvergence("Aberth iteration did not converge")
    if not np.all(ok):
        raise NoConvergence("root residual above tolerance")
    return np.concatenate([np.zeros(nz, dtype=complex), z])


def _merge_clusters(z: np.ndarray, coeffs: np.ndarray, threshold: float) -> np.ndarray:
    """Replace each cluster of m copies by a root of the (m-1)-th derivative.

    A root of multiplicity m is a simple root of that derivative, so a few
    Newton steps there recover full accuracy.
    """
    z = z.copy()
    n = z.size
    label = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < threshold:
                old, new = label[j], label[i]
                label[label == old] = new
    for lab in np.unique(label):
        members = label == lab
        m = int(members.sum())
        if m > 1:
            c = coeffs.copy()
            for _ in range(m - 1):
                c = c[1:] * np.arange(1, c.size)
            dc = c[1:] * np.arange(1, c.size)
            root = z[members].mean()
            for _ in range(8):
                den = poly_eval(dc, root)
                if den == 0:
                    break
                step = poly_eval(c, root) / den
                if not abs(step) < threshold:
                    break
                root = root - step
            z[members] = root
    return z


def newton_solve(system: System, start, config: NewtonConfig | None = None) -> np.ndarray:
    """Damped Newton iteration for a square complex system.

    ``system(x)`` returns ``(residual, jacobian)``. Steps are halved until the
    residual decreases (at most ``config.max_halvings`` times).
    """
    cfg = config or NewtonConfig()
    x = np.array(start, dtype=complex, copy=True).ravel()
    r, jac = system(x)
    rn = np.abs(r).max()
    for _ in range(cfg.max_iterations):
        try:
            dx = lu_solve(jac, -r, cfg.singular_jacobian_threshold)
        except SingularMatrix as exc:
            if rn <= cfg.residual_tolerance:
                return x
            raise SingularJacobian(str(exc)) from None
        if rn <= cfg.residual_tolerance and (
                cfg.step_tolerance is None
                or np.abs(dx).max() <= cfg.step_tolerance * (1 + np.abs(x).max())):
            # one last full step costs nothing and recovers the lost digits
            return x + dx
        t = cfg.step_damping
        for _ in range(cfg.max_halvings + 1):
            xn = x + t * dx
            rn_new = np.abs(system(xn)[0]).max()
            if rn_new < rn:
                break
            t *= 0.5
        x = xn
        r, jac = system(x)
        rn = np.abs(r).max()
    if rn <= cfg.residual_tolerance and cfg.step_tolerance is None:
        return x
    raise NoConvergence(f"residual {rn:.3e} after {cfg.max_iterations} iterations")
