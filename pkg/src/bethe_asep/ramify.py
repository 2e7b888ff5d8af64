"""Root collisions in the hopping rate and the Jordan chains they produce.

For two particles every sector eps (eps^L = 1) has its own polynomial
P_eps(xi; p); a ramification point is a p where P_eps has a double root that
is not one of the p-independent coincident roots xi^2 = eps. At such a point
two eigenstates merge and the generator acquires a 2x2 Jordan block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .asep import as_hopping, build_generator, enumerate_states
from .bethe import (
    ADMISSIBLE,
    Admissibility,
    BetheRoot,
    SolutionSet,
    cleared_residual,
    dedup_up_to_permutation,
    is_stationary,
    permutation_distance,
    root_of_unity,
    sector_polynomial,
    solve_general,
    solve_two_particle,
)
from .errors import (
    ChainDegenerate,
    ClusterTooLarge,
    InvalidDimensions,
    InvalidHopping,
    NoConvergence,
    PathLost,
)
from .numerics import determinant, lu_solve, poly_eval, poly_roots
from .spectrum import amplitudes, eigenvalue, _raw_vector

COLLISION_THRESHOLD = 1e-6
PATH_MARGIN = 1e-3
DEFAULT_REGION = (-0.25, 1.25, -0.75, 0.75)


@dataclass(frozen=True)
class PathSample:
    p: complex
    roots: SolutionSet
    min_pairwise_gap: float


@dataclass(frozen=True)
class RamificationEvent:
    p_r: complex
    colliding_indices: frozenset
    gap_at_detection: float
    L: int = 0
    N: int = 2
    sector: int = 0
    xi: complex = 0j
    discriminant: float = 0.0


@dataclass(frozen=True)
class JordanChain:
    eigenvalue: complex
    eigenvector: np.ndarray
    generalized_vector: np.ndarray
    first_order_residual: float
    second_order_residual: float
    coupling: complex = 0j
    richardson_difference: float = 0.0


# -- helpers ---------------------------------------------------------------------------

def _excluded_points(L: int) -> list[complex]:
    """Hopping values to stay away from: 0, 1/2, 1 and degenerate sectors p + q eps = 0."""
    pts = [0j, 0.5 + 0j, 1 + 0j]
    for k in range(1, L):
        eps = root_of_unity(k, L)
        pts.append(eps / (eps - 1))
    return pts


def _near_excluded(p: complex, L: int, margin: float) -> bool:
    return any(abs(p - z) < margin for z in _excluded_points(L))


def class_gap(roots: list[np.ndarray]) -> float:
    """Smallest permutation-invariant distance between distinct root classes."""
    gap = math.inf
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            gap = min(gap, permutation_distance(roots[i], roots[j]))
    return gap


def _regular_classes(solutions: SolutionSet) -> list[np.ndarray]:
    reps = dedup_up_to_permutation(solutions).admissible_roots()
    return [r.array for r in reps if r.n == 1 or not is_stationary(r.array)]


# -- path tracking ------------------------------------------------------------------------

def track_path(L: int, N: int, p_start, p_end, steps: int, seed: int = 0,
               budget: int = 4000) -> list[PathSample]:
    """Follow every admissible root from ``p_start`` to ``p_end`` in ``steps`` steps.

    Each root is Newton-refined from its previous value; a step is halved up
    to 10 times when refinement fails, roots jump, or two roots merge.
    """
    p0, p1 = complex(p_start), complex(p_end)
    for t in np.linspace(0.0, 1.0, 8 * max(steps, 1) + 1):
        if _near_excluded(p0 + t * (p1 - p0), L, PATH_MARGIN):
            raise InvalidHopping("path passes too close to an excluded hopping rate")
    if N == 2 and L >= 3:
        start = solve_two_particle(L, p0)
    else:
        start = solve_general(L, N, p0, seed=seed, budget=budget)
    stationary = [(r, a) for r, a in start.roots if a.admissible and N > 1 and is_stationary(r.array)]
    current = np.array([r.array for r, a in start.roots
                        if a.admissible and not (N > 1 and is_stationary(r.array))])
    samples = [_sample(p0, current, stationary, L, N)]
    p_prev = p0
    for k in range(1, steps + 1):
        target = p0 + (p1 - p0) * k / steps
        if target == p_prev:
            samples.append(_sample(target, current, stationary, L, N))
            continue
        current = _advance(current, p_prev, target, L)
        p_prev = target
        samples.append(_sample(target, current, stationary, L, N))
    return samples


def _advance(current: np.ndarray, p_from: complex, p_to: complex, L: int) -> np.ndarray:
    p, x = p_from, current
    h = p_to - p_from
    halvings = 0
    while p != p_to:
        step_to = p_to if abs(p_to - p) <= abs(h) else p + h
        ok, y = _refine(x, step_to, L)
        if ok:
            p, x = step_to, y
            continue
        h /= 2
        halvings += 1
        if halvings > 10:
            raise PathLost(f"lost track of roots near p={p}")
    return x


def _refine(x: np.ndarray, p: complex, L: int) -> tuple[bool, np.ndarray]:
    if x.size == 0:
        return True, x
    y, status = kernels.newton_batch(x, p, L)
    if np.any(status != kernels.CONVERGED):
        return False, x
    if np.any(np.abs(y - x).max(axis=1) > 0.1 * (1 + np.abs(x).max(axis=1))):
        return False, x
    for i in range(len(y)):
        if np.any(np.abs(y[i + 1:] - y[i]).max(axis=1) < COLLISION_THRESHOLD):
            return False, x
    return True, y


def _sample(p, current, stationary, L, N) -> PathSample:
    hop = as_hopping(p)
    roots = list(stationary) + [
        (BetheRoot(tuple(x), float(np.abs(cleared_residual(x, hop, L)).max())), Admissibility(ADMISSIBLE))
        for x in current]
    sol = SolutionSet(tuple(roots), hop, L, N, "raw")
    if N == 1:
        gap = class_gap([x for x in current])
    else:
        gap = class_gap(_regular_classes(sol))
    return PathSample(complex(p), sol, float(gap))


# -- two-particle ramification search ----------------------------------------------------

def _sector_roots(L: int, p: complex, k: int) -> np.ndarray:
    """Roots of P_eps minus the p-independent ones (xi^2 = eps and, for eps = 1, xi = 1)."""
    eps = root_of_unity(k, L)
    r = poly_roots(sector_polynomial(L, p, eps))
    keep = np.abs(r * r - eps) > COLLISION_THRESHOLD
    if k == 0:
        keep &= np.abs(r - 1) > COLLISION_THRESHOLD
    return r[keep]


def _min_gap(r: np.ndarray) -> tuple[float, int, int]:
    best = (math.inf, -1, -1)
    for i in range(r.size):
        for j in range(i + 1, r.size):
            d = abs(r[i] - r[j])
            if d < best[0]:
                best = (d, i, j)
    return best


def sector_gap(L: int, p: complex) -> tuple[float, int]:
    """Smallest distance between movable roots in any sector, and that sector."""
    best = (math.inf, -1)
    for k in range(1, L):
        d = _min_gap(_sector_roots(L, p, k))[0]
        if d < best[0]:
            best = (d, k)
    return best


def sylvester_resultant(f, g) -> complex:
    """Resultant of two ascending-coefficient polynomials via the Sylvester matrix."""
    f = np.trim_zeros(np.asarray(f, dtype=complex), "b")[::-1]
    g = np.trim_zeros(np.asarray(g, dtype=complex), "b")[::-1]
    m, n = f.size - 1, g.size - 1
    size = m + n
    s = np.zeros((size, size), dtype=complex)
    for i in range(n):
        s[i, i:i + m + 1] = f
    for i in range(m):
        s[n + i, i:i + n + 1] = g
    return determinant(s)


def sector_discriminant(L: int, p: complex, k: int) -> float:
    """|Res(P_eps, dP_eps/dxi)|, scaled by the leading coefficient."""
    c = sector_polynomial(L, p, root_of_unity(k, L))
    dc = c[1:] * np.arange(1, c.size)
    return abs(sylvester_resultant(c, dc)) / max(abs(c[-1]), 1e-300)


def _refine_double_root(L: int, k: int, xi: complex, p: complex, iterations: int = 50):
    """Newton on (P, dP/dxi) = 0 in the unknowns (xi, p)."""
    eps = root_of_unity(k, L)
    one = np.ones(1)
    for _ in range(iterations):
        c = sector_polynomial(L, p, eps)
        dc = c[1:] * np.arange(1, c.size)
        ddc = dc[1:] * np.arange(1, dc.size)
        # dP/dp = (1 - eps)(xi^L + 1)
        cp = np.zeros(L + 1, dtype=complex)
        cp[0] = cp[L] = 1 - eps
        dcp = cp[1:] * np.arange(1, cp.size)
        f = np.array([poly_eval(c, xi * one)[0], poly_eval(dc, xi * one)[0]])
        jac = np.array([[poly_eval(dc, xi * one)[0], poly_eval(cp, xi * one)[0]],
                        [poly_eval(ddc, xi * one)[0], poly_eval(dcp, xi * one)[0]]])
        step = lu_solve(jac, -f)
        xi, p = xi + step[0], p + step[1]
        if np.abs(step).max() < 1e-15 * (1 + abs(xi) + abs(p)):
            break
    return complex(xi), complex(p)


def find_ramification(L: int, N: int, search_region=DEFAULT_REGION, grid: int = 41,
                      threshold: float = COLLISION_THRESHOLD) -> list[RamificationEvent]:
    """Scan a rectangle of complex p for collisions between eigenstate classes.

    The region is (re_min, re_max, im_min, im_max). Local minima of the gap
    on the grid are refined by Newton on the double-root system and kept when
    the gap there drops below ``threshold``. Collisions with the p-independent
    coincident roots are not eigenstate collisions and are not reported.
    """
    if N == 1:
        return []
    if N != 2:
        raise InvalidDimensions("ramification search is implemented for N = 2")
    if L < 3:
        raise InvalidDimensions("need L >= 3")
    re0, re1, im0, im1 = search_region
    res = np.linspace(re0, re1, grid)
    ims = np.linspace(im0, im1, grid)
    gaps = np.full((grid, grid), np.inf)
    for a, x in enumerate(res):
        for b, y in enumerate(ims):
            p = complex(x, y)
            if _near_excluded(p, L, PATH_MARGIN):
                continue
            try:
                gaps[a, b] = sector_gap(L, p)[0]
            except NoConvergence:
                continue
    events: list[RamificationEvent] = []
    for a in range(grid):
        for b in range(grid):
            g = gaps[a, b]
            if not np.isfinite(g):
                continue
            nb = gaps[max(a - 1, 0):a + 2, max(b - 1, 0):b + 2]
            if g > nb.min():
                continue
            event = _refine_event(L, complex(res[a], ims[b]), threshold)
            if event is None:
                continue
            if any(abs(event.p_r - e.p_r) < 1e-8 for e in events):
                continue
            if not (re0 <= event.p_r.real <= re1 and im0 <= event.p_r.imag <= im1):
                continue
            events.append(event)
    events.sort(key=lambda e: (round(e.p_r.real, 10), round(e.p_r.imag, 10)))
    return events


def _refine_event(L: int, p: complex, threshold: float) -> RamificationEvent | None:
    best = None
    for k in range(1, L):
        r = _sector_roots(L, p, k)
        d, i, j = _min_gap(r)
        if i < 0:
            continue
        try:
            xi, pr = _refine_double_root(L, k, 0.5 * (r[i] + r[j]), p)
        except Exception:
            continue
        if not (np.isfinite(xi) and np.isfinite(pr)) or _near_excluded(pr, L, PATH_MARGIN):
            continue
        eps = root_of_unity(k, L)
        if abs(xi * xi - eps) < 1e-4:
            continue  # merges with a coincident root, not a class collision
        try:
            rr = _sector_roots(L, pr, k)
        except NoConvergence:
            continue
        close = np.where(np.abs(rr - xi) < 1e-4)[0]
        gap = _min_gap(rr)[0] if rr.size > 1 else math.inf
        if len(close) < 2 or gap >= threshold:
            continue
        cand = RamificationEvent(pr, frozenset(int(c) for c in close), float(gap), L, 2, k,
                                 xi, float(sector_discriminant(L, pr, k)))
        if best is None or cand.gap_at_detection < best.gap_at_detection:
            best = cand
    return best


# -- Jordan chains ------------------------------------------------------------------------

Branches = Callable[[complex], tuple[tuple[complex, np.ndarray], tuple[complex, np.ndarray]]]


def chain_from_family(matrix: Callable[[complex], np.ndarray], branches: Branches,
                      t_r: complex, h: float = 1e-4) -> JordanChain:
    """Jordan chain at a collision of two eigen-branches of ``matrix(t)``.

    ``branches(t)`` returns the two colliding (eigenvalue, eigenvector) pairs
    with vectors normalised the same way on both sides (a fixed pinned
    component). The generalized vector is w(t) = (u_a - u_b)/(E_a - E_b),
    which is symmetric in the two branches and satisfies
    (H - E_b) w = u_a exactly; it is averaged over t_r +- h.
    """
    (e_r, u_r), _ = branches(t_r)
    w1 = _difference_quotient(branches, t_r, h)
    w2 = _difference_quotient(branches, t_r, h / 2)
    w = (4 * w2 - w1) / 3 if np.isfinite(w1).all() else w2
    hmat = matrix(t_r)
    k = hmat - e_r * np.eye(hmat.shape[0])
    hw = k @ w
    c = complex(np.vdot(u_r, hw) / np.vdot(u_r, u_r))
    nw = np.abs(w).max()
    first = float(np.abs(hw - c * u_r).max() / nw)
    second = float(np.abs(k @ hw).max() / nw)
    rich = float(np.abs(w1 / np.abs(w1).max() - w2 / np.abs(w2).max()).max())
    if abs(c) <= 1e-6:
        raise ChainDegenerate("generalized vector does not couple to the eigenvector")
    return JordanChain(complex(e_r), u_r, w, first, second, c, rich)


def _difference_quotient(branches: Branches, t_r: complex, h: float) -> np.ndarray:
    total = 0
    for t in (t_r + h, t_r - h):
        (ea, ua), (eb, ub) = branches(t)
        if abs(ea - eb) < 1e-10:
            raise ChainDegenerate("the two eigenvalues do not split near the collision")
        total = total + (ua - ub) / (ea - eb)
    return total / 2


def jordan_block(chain: JordanChain, matrix: np.ndarray) -> np.ndarray:
    """2x2 matrix of ``matrix`` restricted to span(eigenvector, generalized/c)."""
    v = chain.eigenvector
    w = chain.generalized_vector / chain.coupling
    basis = np.column_stack([v, w])
    coords, *_ = np.linalg.lstsq(basis, matrix @ basis, rcond=None)
    return coords


def jordan_chain(event: RamificationEvent, h: float = 1e-4) -> JordanChain:
    """Jordan chain of the generator at a two-particle ramification point."""
    if len(event.colliding_indices) > 2:
        raise ClusterTooLarge("more than two roots collide; iterated limits are not implemented")
    if len(event.colliding_indices) < 2:
        raise ChainDegenerate("event has fewer than two colliding roots")
    L, k = event.L, event.sector
    eps = root_of_unity(k, L)
    space = enumerate_states(L, 2)
    configs = space.as_array()
    u0 = _pinned_vector(np.array([event.xi, eps / event.xi]), event.p_r, configs)
    pin = int(np.argmax(np.abs(u0)))

    def vector(xi, p):
        u = _pinned_vector(np.array([xi, eps / xi]), p, configs)
        return u / u[pin]

    def branches(p):
        if p == event.p_r:
            u = vector(event.xi, p)
            e = eigenvalue(np.array([event.xi, eps / event.xi]), p)
            return (e, u), (e, u)
        r = poly_roots(sector_polynomial(L, p, eps))
        order = np.argsort(np.abs(r - event.xi))
        if abs(r[order[2]] - event.xi) < 4 * abs(r[order[1]] - event.xi):
            raise ClusterTooLarge("a third root approaches the collision")
        out = []
        for idx in order[:2]:
            xi = r[idx]
            out.append((eigenvalue(np.array([xi, eps / xi]), p), vector(xi, p)))
        return tuple(out)

    def matrix(p):
        return np.array(build_generator(space, p).entries)

    return chain_from_family(matrix, branches, event.p_r, h)


def _pinned_vector(x: np.ndarray, p: complex, configs: np.ndarray) -> np.ndarray:
    u, _ = _raw_vector(x, _Space(configs), amplitudes(x, p))
    return u


class _Space:
    """Minimal stand-in exposing ``as_array`` for vector evaluation."""

    def __init__(self, configs):
        self._configs = configs

    def as_array(self):
        return self._configs
