"""Bethe ansatz equations: residuals, solvers and admissibility.

For N particles on L sites the equations read

    xi_j^L = (-1)^(N-1) prod_{i != j} (p + q xi_j xi_i - xi_j) / (p + q xi_j xi_i - xi_i)

and the cleared form multiplies through by every denominator, including the
diagonal factor ``p + q xi_j^2 - xi_j`` that is common to both products.
Multistart Newton works on the *reduced* system with that common factor
divided out, which removes a whole family of spurious solutions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import permutations

import numpy as np

from . import kernels
from .asep import HoppingRate, as_hopping
from .errors import BudgetExhausted, DegenerateSector, InvalidDimensions, InvalidHopping
from .numerics import poly_roots

ADMISSIBLE = "Admissible"
COINCIDENT_PAIR = "CoincidentPair"
ZERO_OR_INFINITE = "ZeroOrInfiniteComponent"
SPURIOUS = "SpuriousDenominator"
_TAG_ORDER = {ADMISSIBLE: 0, COINCIDENT_PAIR: 1, ZERO_OR_INFINITE: 2, SPURIOUS: 3}


@dataclass(frozen=True)
class BetheThresholds:
    coincidence: float = 1e-6
    # Newton creeps towards the singular all-ones point and stalls a few
    # 1e-6 away from it, so the stationary test needs a wider radius.
    stationary: float = 1e-4
    zero: float = 1e-8
    infinity: float = 1e8
    denominator: float = 1e-10
    uncleared: float = 1e-7
    degenerate_sector: float = 1e-10


DEFAULT_THRESHOLDS = BetheThresholds()


@dataclass(frozen=True)
class SolverConfig:
    """Multistart settings; annulus bounds are heuristic."""

    r_min: float = 0.3
    r_max: float = 3.0
    chunk: int = 64
    max_iterations: int = 80
    residual_tolerance: float = 1e-11
    step_tolerance: float = 1e-10
    threads: int | None = None


@dataclass(frozen=True)
class BetheRoot:
    xi: tuple[complex, ...]
    residual_norm: float = 0.0
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(complex(z) for z in self.xi))
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be at least 1")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.xi, dtype=complex)

    @property
    def n(self) -> int:
        return len(self.xi)


@dataclass(frozen=True)
class Admissibility:
    tag: str
    indices: tuple[int, ...] = ()

    @property
    def admissible(self) -> bool:
        return self.tag == ADMISSIBLE

    def __str__(self) -> str:
        if self.indices:
            return f"{self.tag}({','.join(map(str, self.indices))})"
        return self.tag


@dataclass(frozen=True)
class SolutionSet:
    roots: tuple[tuple[BetheRoot, Admissibility], ...]
    hopping: HoppingRate
    L: int
    N: int
    dedup_mode: str = "raw"
    target: int | None = None
    starts_used: int = 0

    @property
    def raw_count(self) -> int:
        return sum(r.multiplicity for r, _ in self.roots)

    @property
    def admissible_count(self) -> int:
        return sum(r.multiplicity for r, a in self.roots if a.admissible)

    @property
    def inadmissible_count(self) -> int:
        return sum(r.multiplicity for r, a in self.roots if not a.admissible)

    @property
    def complete(self) -> bool:
        return self.target is not None and self.admissible_count >= self.target

    def admissible_roots(self) -> list[BetheRoot]:
        return [r for r, a in self.roots if a.admissible]


def falling_factorial(L: int, N: int) -> int:
    return math.perm(L, N) if L >= N else 0


# -- residuals -----------------------------------------------------------------

def _factors(xi: np.ndarray, hop: HoppingRate):
    prod = xi[:, None] * xi[None, :]
    d = hop.p + hop.q * prod - xi[None, :]   # d[j, i] = p + q xi_j xi_i - xi_i
    u = hop.p + hop.q * prod - xi[:, None]   # u[j, i] = p + q xi_j xi_i - xi_j
    return d, u


def cleared_residual(xi, hopping, L: int) -> np.ndarray:
    """f_j = xi_j^L prod_i D_ji + (-1)^N prod_i U_ji over all i (diagonal included)."""
    x = np.asarray(xi, dtype=complex).ravel()
    d, u = _factors(x, as_hopping(hopping))
    sgn = (-1) ** x.size
    return x ** L * d.prod(axis=1) + sgn * u.prod(axis=1)


def reduced_residual(xi, hopping, L: int) -> np.ndarray:
    """Cleared residual with the diagonal factor p + q xi_j^2 - xi_j divided out."""
    return kernels.reduced_system(np.asarray(xi, dtype=complex).ravel(),
                                  as_hopping(hopping).p, L)[0]


def bethe_jacobian(xi, hopping, L: int) -> np.ndarray:
    """Analytic Jacobian of :func:`cleared_residual`."""
    hop = as_hopping(hopping)
    x = np.asarray(xi, dtype=complex).ravel()
    n = x.size
    p, q = hop.p, hop.q
    d, u = _factors(x, hop)
    sgn = (-1) ** n
    jac = np.zeros((n, n), dtype=complex)
    for j in range(n):
        xl = x[j] ** L
        for k in range(n):
            total = L * x[j] ** (L - 1) * d[j].prod() if k == j else 0j
            for i in range(n):
                if i == j:
                    dd = du = (2 * q * x[j] - 1) if k == j else 0
                elif k == j:
                    dd, du = q * x[i], q * x[i] - 1
                elif k == i:
                    dd, du = q * x[j] - 1, q * x[j]
                else:
                    continue
                rest = [m for m in range(n) if m != i]
                total += xl * dd * d[j, rest].prod() + sgn * du * u[j, rest].prod()
            jac[j, k] = total
    return jac


def uncleared_residual(xi, hopping, L: int) -> np.ndarray:
    """xi_j^L - (-1)^(N-1) prod_{i != j} U_ji / D_ji; inf where a denominator vanishes."""
    x = np.asarray(xi, dtype=complex).ravel()
    n = x.size
    d, u = _factors(x, as_hopping(hopping))
    out = np.empty(n, dtype=complex)
    for j in range(n):
        others = [i for i in range(n) if i != j]
        den = d[j, others].prod()
        if den == 0:
            out[j] = np.inf
            continue
        out[j] = x[j] ** L - (-1) ** (n - 1) * u[j, others].prod() / den
    return out


# -- classification --------------------------------------------------------------

def is_stationary(xi, thresholds: BetheThresholds = DEFAULT_THRESHOLDS) -> bool:
    """All components at 1: the uniform stationary state, admissible by limit."""
    x = np.asarray(xi, dtype=complex)
    return bool(np.all(np.abs(x - 1) < thresholds.stationary))


def classify(root, hopping=None, L: int | None = None,
             thresholds: BetheThresholds = DEFAULT_THRESHOLDS) -> Admissibility:
    """Admissibility of a root; indices in the returned tag are 1-based.

    The all-ones point is admissible even though its components coincide: it
    sits on the locus where the equations are 0/0 and carries the stationary
    state. The spurious-denominator test needs ``hopping`` and ``L``.
    """
    x = root.array if isinstance(root, BetheRoot) else np.asarray(root, dtype=complex)
    n = x.size
    if n > 1 and is_stationary(x, thresholds):
        return Admissibility(ADMISSIBLE)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(x[i] - x[j]) < thresholds.coincidence:
                return Admissibility(COINCIDENT_PAIR, (i + 1, j + 1))
    mags = np.abs(x)
    for i in range(n):
        if mags[i] < thresholds.zero or mags[i] > thresholds.infinity:
            return Admissibility(ZERO_OR_INFINITE, (i + 1,))
    if hopping is not None and L is not None:
        d, _ = _factors(x, as_hopping(hopping))
        if np.abs(d).min() < thresholds.denominator:
            if not np.all(np.abs(uncleared_residual(x, hopping, L)) <= thresholds.uncleared):
                return Admissibility(SPURIOUS)
    return Admissibility(ADMISSIBLE)


# -- permutation-invariant comparison -----------------------------------------------

_PERM_CACHE: dict[int, np.ndarray] = {}


def _perms(n: int) -> np.ndarray:
    if n not in _PERM_CACHE:
        _PERM_CACHE[n] = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
    return _PERM_CACHE[n]


def permutation_distance(a, b) -> float:
    """min over permutations sigma of max_k |a_sigma(k) - b_k|."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.abs(a[_perms(a.size)] - b[None, :]).max(axis=1).min())


def canonical(xi) -> tuple[complex, ...]:
    """Components sorted lexicographically on (re, im)."""
    return tuple(sorted((complex(z) for z in xi), key=lambda z: (z.real, z.imag)))


# -- exact two-particle solver ---------------------------------------------------------

def root_of_unity(k: int, L: int) -> complex:
    """exp(2 pi i k / L) with the axis values snapped to exact numbers."""
    k %= L
    if 4 * k % L == 0:
        return (1, 1j, -1, -1j)[4 * k // L]
    return complex(np.exp(2j * np.pi * k / L))


def sector_polynomial(L: int, hopping, eps: complex) -> np.ndarray:
    """Ascending coefficients of (p + q eps) xi^L - eps xi^(L-1) - xi + (p + q eps)."""
    hop = as_hopping(hopping)
    a = hop.p + hop.q * eps
    c = np.zeros(L + 1, dtype=complex)
    c[0] += a
    c[1] += -1
    c[L - 1] += -eps
    c[L] += a
    return c


def _check_hopping(hop: HoppingRate, excluded=(0.0, 1.0), margin: float = 0.0):
    for v in excluded:
        if abs(hop.p - v) <= margin:
            raise InvalidHopping(f"hopping rate p={hop.p} too close to {v}")


def _make_root(x, hop, L) -> BetheRoot:
    return BetheRoot(tuple(x), float(np.abs(cleared_residual(x, hop, L)).max()))


def solve_two_particle(L: int, hopping,
                       thresholds: BetheThresholds = DEFAULT_THRESHOLDS) -> SolutionSet:
    """All L^2 raw roots of the N=2 equations from the per-sector polynomials.

    With xi_1 xi_2 = eps, eps^L = 1, each sector reduces to a degree-L
    polynomial in xi_1.
    """
    if L < 3:
        raise InvalidDimensions("two-particle solver needs L >= 3")
    hop = as_hopping(hopping)
    _check_hopping(hop)
    out = []
    for k in range(L):
        eps = root_of_unity(k, L)
        if abs(hop.p + hop.q * eps) < thresholds.degenerate_sector:
            raise DegenerateSector(f"leading coefficient vanishes in sector k={k}")
        for z in poly_roots(sector_polynomial(L, hop, eps)):
            x = np.array([z, eps / z])
            root = _make_root(x, hop, L)
            out.append((root, classify(root, hop, L, thresholds)))
    return SolutionSet(tuple(out), hop, L, 2, "raw", target=L * (L - 1), starts_used=0)


# -- general multistart solver -----------------------------------------------------------

def sample_starts(rng: np.random.Generator, count: int, n: int, config: SolverConfig) -> np.ndarray:
    """Points uniform (by area) on the annulus r_min <= |xi| <= r_max."""
    r = np.sqrt(rng.uniform(config.r_min ** 2, config.r_max ** 2, size=(count, n)))
    theta = rng.uniform(0.0, 2 * np.pi, size=(count, n))
    return r * np.exp(1j * theta)


def solve_general(L: int, N: int, hopping, seed: int = 0, budget: int = 4000,
                  config: SolverConfig = SolverConfig(),
                  thresholds: BetheThresholds = DEFAULT_THRESHOLDS,
                  raise_on_budget: bool = True) -> SolutionSet:
    """Multistart Newton until L(L-1)...(L-N+1) admissible roots are found.

    The stationary all-ones root is inserted up front with multiplicity N!.
    Every other admissible root found is expanded into its N! permutations.
    Inadmissible limits are kept (quarantined) for auditing.
    """
    if not 1 <= N <= L:
        raise InvalidDimensions(f"need 1 <= N <= L, got L={L}, N={N}")
    hop = as_hopping(hopping)
    _check_hopping(hop, (0.0, 0.5, 1.0), 1e-6)
    target = falling_factorial(L, N)
    entries: list[tuple[BetheRoot, Admissibility]] = []
    ones = np.ones(N, dtype=complex)
    entries.append((BetheRoot(tuple(ones), 0.0, math.factorial(N)), Admissibility(ADMISSIBLE)))
    count = math.factorial(N)
    classes: list[np.ndarray] = []
    quarantined: list[np.ndarray] = []
    perms = _perms(N)
    rng = np.random.default_rng(seed)
    used = 0
    while count < target and used < budget:
        k = min(config.chunk, budget - used)
        starts = sample_starts(rng, k, N, config)
        used += k
        xs, status = kernels.newton_batch(
            starts, hop.p, L, threads=config.threads, max_iter=config.max_iterations,
            tol=config.residual_tolerance, step_tol=config.step_tolerance)
        for x, st in zip(xs, status):
            if st != kernels.CONVERGED:
                continue
            if is_stationary(x, thresholds):
                continue
            adm = classify(x, hop, L, thresholds)
            if adm.admissible:
                if any(permutation_distance(x, c) < thresholds.coincidence for c in classes):
                    continue
                classes.append(x)
                for perm in perms:
                    y = x[perm]
                    entries.append((_make_root(y, hop, L), adm))
                count += len(perms)
            else:
                if any(np.abs(x - y).max() < thresholds.coincidence for y in quarantined):
                    continue
                quarantined.append(x)
                entries.append((_make_root(x, hop, L), adm))
        if count >= target:
            break
    result = SolutionSet(tuple(entries), hop, L, N, "raw", target=target, starts_used=used)
    if count < target and raise_on_budget:
        raise BudgetExhausted(count, target, result)
    return result


# -- deduplication -------------------------------------------------------------------

def dedup_up_to_permutation(solutions: SolutionSet,
                            thresholds: BetheThresholds = DEFAULT_THRESHOLDS) -> SolutionSet:
    """Merge roots that are permutations of each other; multiplicities add up."""
    reps: list[list] = []  # [canonical xi, residual, multiplicity, admissibility]
    for root, adm in solutions.roots:
        x = root.array
        for rep in reps:
            if rep[3].tag == adm.tag and permutation_distance(x, rep[0]) < thresholds.coincidence:
                rep[2] += root.multiplicity
                rep[1] = max(rep[1], root.residual_norm)
                break
        else:
            reps.append([np.array(canonical(x)), root.residual_norm, root.multiplicity, adm])
    reps.sort(key=lambda r: (_TAG_ORDER[r[3].tag],
                             tuple((z.real, z.imag) for z in r[0])))
    roots = []
    for xi, res, mult, adm in reps:
        if adm.tag == COINCIDENT_PAIR:
            adm = classify(xi, solutions.hopping, solutions.L, thresholds)
        roots.append((BetheRoot(tuple(xi), res, mult), adm))
    return replace(solutions, roots=tuple(roots), dedup_mode="up_to_permutation")
