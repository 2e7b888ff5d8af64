"""Bethe eigenvectors, eigenvalues and the completeness certificate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .asep import GeneratorMatrix, HoppingRate, StateSpace, as_hopping, build_generator, enumerate_states
from .bethe import (
    BetheRoot,
    BetheThresholds,
    DEFAULT_THRESHOLDS,
    SolverConfig,
    dedup_up_to_permutation,
    solve_general,
)
from .errors import AmplitudeSingularity, BetheAsepError, BudgetExhausted, ZeroComponent, ZeroVector
from .numerics import rank_with_pivots

ZERO_VECTOR_THRESHOLD = 1e-10
DENOMINATOR_THRESHOLD = 1e-12
RESIDUAL_TOLERANCE = 1e-8
RANK_TOLERANCE = 1e-8
TRACE_TOLERANCE = 1e-6

# Fixed generic direction used to resolve 0/0 amplitude factors at points
# where two components coincide on the locus p + q x^2 - x = 0.
_BLOWUP_DIRECTION = np.exp(0.7j * np.arange(1, 17)) * (1 + 0.1 * np.arange(16))

Permutation = tuple[int, ...]


def _xi(root) -> np.ndarray:
    return root.array if isinstance(root, BetheRoot) else np.asarray(root, dtype=complex).ravel()


def _pair_factor(x: complex, y: complex, a: complex, b: complex, hop: HoppingRate) -> complex:
    """Scattering factor -(p + q x y - x)/(p + q x y - y) for one inversion.

    When numerator and denominator both vanish (x = y on the singular locus)
    the limit along the direction (a, b) is taken instead.
    """
    p, q = hop.p, hop.q
    num = p + q * x * y - x
    den = p + q * x * y - y
    scale = 1 + abs(x * y)
    if abs(den) < DENOMINATOR_THRESHOLD * scale:
        if abs(num) >= DENOMINATOR_THRESHOLD * scale:
            raise AmplitudeSingularity(f"amplitude denominator vanishes at ({x}, {y})")
        num = (q * y - 1) * a + q * x * b
        den = q * y * a + (q * x - 1) * b
    return -num / den


def amplitudes(root, hopping) -> dict[Permutation, complex]:
    """A_sigma as a product over inversions i < j, sigma(i) > sigma(j).

    The factor for an inversion uses (xi_sigma(i), xi_sigma(j)); the boundary
    condition check confirms this is the consistent choice.
    """
    hop = as_hopping(hopping)
    x = _xi(root)
    n = x.size
    d = _BLOWUP_DIRECTION[:n]
    out = {}
    for sigma in permutations(range(n)):
        a = 1 + 0j
        for i in range(n):
            for j in range(i + 1, n):
                if sigma[i] > sigma[j]:
                    a *= _pair_factor(x[sigma[i]], x[sigma[j]], d[sigma[i]], d[sigma[j]], hop)
        out[sigma] = complex(a)
    return out


def _ansatz(x: np.ndarray, amps: dict, positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ansatz values at integer positions (rows) and the no-cancellation scale."""
    positions = np.asarray(positions, dtype=np.int64)
    lo = min(0, int(positions.min()))
    hi = int(positions.max())
    powers = x[:, None] ** np.arange(lo, hi + 1)[None, :]
    idx = positions - lo
    total = np.zeros(positions.shape[0], dtype=complex)
    scale = np.zeros(positions.shape[0])
    for sigma, a in amps.items():
        term = a * powers[np.array(sigma)[None, :], idx].prod(axis=1)
        total += term
        scale = np.maximum(scale, np.abs(term))
    return total, scale


def _raw_vector(root, space: StateSpace, amps: dict):
    return _ansatz(_xi(root), amps, space.as_array())


def _normalizer(u: np.ndarray) -> complex:
    mags = np.abs(u)
    k = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
    return complex(u[k])


def build_eigenvector(root, space: StateSpace, hopping) -> np.ndarray:
    """u(x) = sum_sigma A_sigma prod_i xi_sigma(i)^x_i, scaled so the first
    largest component equals 1.

    ZeroVector is raised when every component is below 1e-10 relative to the
    largest individual term, i.e. the sum cancels completely.
    """
    amps = amplitudes(root, hopping)
    u, scale = _raw_vector(root, space, amps)
    if np.abs(u).max() < ZERO_VECTOR_THRESHOLD * max(1.0, scale.max()):
        raise ZeroVector("Bethe vector vanishes identically")
    return u / _normalizer(u)


def eigenvalue(root, hopping) -> complex:
    hop = as_hopping(hopping)
    x = _xi(root)
    if np.any(np.abs(x) < 1e-8):
        raise ZeroComponent("a component of the root is (numerically) zero")
    return complex(np.sum(hop.p / x + hop.q * x - 1))


@dataclass(frozen=True)
class BetheState:
    root: BetheRoot
    amplitudes: dict = field(repr=False)
    vector: np.ndarray = field(repr=False)
    eigenvalue: complex
    normalizer: complex = 1.0


def build_state(root: BetheRoot, space: StateSpace, hopping) -> BetheState:
    amps = amplitudes(root, hopping)
    u, scale = _raw_vector(root, space, amps)
    if np.abs(u).max() < ZERO_VECTOR_THRESHOLD * max(1.0, scale.max()):
        raise ZeroVector("Bethe vector vanishes identically")
    c = _normalizer(u)
    return BetheState(root, amps, u / c, eigenvalue(root, hopping), c)


def state_residual(state: BetheState, gen: GeneratorMatrix) -> float:
    v = state.vector
    return float(np.abs(gen.entries @ v - state.eigenvalue * v).max() / np.abs(v).max())


def boundary_check(state: BetheState, hopping) -> float:
    """Largest violation of p u(.., x, x, ..) + q u(.., x+1, x+1, ..) - u(.., x, x+1, ..).

    Evaluated on the analytic extension of the ansatz for every adjacent pair
    and every x in 1..L. Spectator coordinates sit at fixed sample values: far
    to the left for earlier particles and far to the right for later ones.
    """
    hop = as_hopping(hopping)
    x = state.root.array
    n = x.size
    if n < 2:
        return 0.0
    L = _infer_sites(state)
    rows_a, rows_b, rows_c = [], [], []
    for k in range(n - 1):
        for site in range(1, L + 1):
            base = [site - 2 * (k - i) if i < k else site + 2 * (i - k) for i in range(n)]
            a = list(base)
            a[k] = a[k + 1] = site
            b = list(base)
            b[k] = b[k + 1] = site + 1
            c = list(base)
            c[k], c[k + 1] = site, site + 1
            rows_a.append(a)
            rows_b.append(b)
            rows_c.append(c)
    ua, _ = _ansatz(x, state.amplitudes, np.array(rows_a))
    ub, _ = _ansatz(x, state.amplitudes, np.array(rows_b))
    uc, _ = _ansatz(x, state.amplitudes, np.array(rows_c))
    viol = (hop.p * ua + hop.q * ub - uc) / state.normalizer
    return float(np.abs(viol).max())


def _infer_sites(state: BetheState) -> int:
    # The vector length is C(L, N); recover L from it.
    n = state.root.n
    size = state.vector.size
    L = n
    while math.comb(L, n) < size:
        L += 1
    return L


# -- certificate ---------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    L: int
    N: int
    hopping: HoppingRate
    eigenstate_count: int
    min_singular_proxy: float
    max_residual: float
    trace_check: tuple[complex, complex, float]
    trace_sq_check: tuple[complex, complex, float]
    verdict: str
    reason: str = ""
    eigenvalues: tuple[complex, ...] = ()
    starts_used: int = 0
    roots: tuple[BetheRoot, ...] = field(default=(), repr=False)

    @property
    def complete(self) -> bool:
        return self.verdict == "Complete"


def certify(L: int, N: int, hopping, seed: int = 0, budget: int = 4000,
            config: SolverConfig = SolverConfig(),
            thresholds: BetheThresholds = DEFAULT_THRESHOLDS) -> Certificate:
    """Solve, build every eigenstate and check completeness without diagonalizing H.

    Completeness needs C(L, N) states, full rank of the eigenvector matrix,
    small residuals, and agreement of the first two spectral moments with
    trace(H) and trace(H^2).
    """
    hop = as_hopping(hopping)
    space = enumerate_states(L, N)
    gen = build_generator(space, hop)
    h = gen.entries
    expected = len(space)
    reasons = []
    try:
        solutions = solve_general(L, N, hop, seed=seed, budget=budget, config=config,
                                  thresholds=thresholds)
    except BudgetExhausted as exc:
        solutions = exc.solutions
        reasons.append(str(exc))
    classes = dedup_up_to_permutation(solutions, thresholds).admissible_roots()
    states = []
    for root in classes:
        try:
            states.append(build_state(root, space, hop))
        except BetheAsepError as exc:
            reasons.append(f"{type(exc).__name__} at root {root.xi}")
    count = len(states)
    if count:
        residual = max(state_residual(s, gen) for s in states)
        mat = np.column_stack([s.vector for s in states])
        rank, pivots = rank_with_pivots(mat, RANK_TOLERANCE)
        proxy = float(pivots.min()) if pivots.size else 0.0
    else:
        residual, rank, proxy = float("inf"), 0, 0.0
    evals = np.array([s.eigenvalue for s in states], dtype=complex)
    tr1 = complex(np.trace(h))
    tr2 = complex(np.trace(h @ h))
    s1 = complex(evals.sum())
    s2 = complex((evals ** 2).sum())
    d1, d2 = abs(s1 - tr1), abs(s2 - tr2)
    if count != expected:
        reasons.append(f"{count} eigenstates, expected {expected}")
    if rank != expected:
        reasons.append(f"rank {rank}, expected {expected}")
    if residual > RESIDUAL_TOLERANCE:
        reasons.append(f"max residual {residual:.3e}")
    if d1 > TRACE_TOLERANCE * (1 + abs(tr1)):
        reasons.append(f"trace mismatch {d1:.3e}")
    if d2 > TRACE_TOLERANCE * (1 + abs(tr2)):
        reasons.append(f"trace-square mismatch {d2:.3e}")
    order = sorted(range(count), key=lambda k: (evals[k].real, evals[k].imag))
    return Certificate(
        L=L, N=N, hopping=hop, eigenstate_count=count, min_singular_proxy=proxy,
        max_residual=float(residual), trace_check=(s1, tr1, d1), trace_sq_check=(s2, tr2, d2),
        verdict="Incomplete" if reasons else "Complete", reason="; ".join(reasons),
        eigenvalues=tuple(complex(evals[k]) for k in order),
        starts_used=solutions.starts_used,
        roots=tuple(states[k].root for k in order),
    )
