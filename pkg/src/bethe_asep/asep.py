"""State space and Markov generator of the periodic ASEP."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import DimensionMismatch, InvalidDimensions, TooLarge

MAX_STATES = 5000

Configuration = tuple[int, ...]


@dataclass(frozen=True)
class HoppingRate:
    """Clockwise rate ``p``; the counter-clockwise rate is ``q = 1 - p``."""

    p: complex

    def __post_init__(self):
        p = complex(self.p)
        if not (np.isfinite(p.real) and np.isfinite(p.imag)):
            raise ValueError("hopping rate must be finite")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> complex:
        return 1 - self.p


def as_hopping(hopping) -> HoppingRate:
    return hopping if isinstance(hopping, HoppingRate) else HoppingRate(hopping)


@dataclass(frozen=True)
class StateSpace:
    sites: int
    particles: int
    configurations: tuple[Configuration, ...]
    index_of: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.configurations)

    def as_array(self) -> np.ndarray:
        """Configurations as an integer array of shape (states, N)."""
        return np.array(self.configurations, dtype=np.int64).reshape(len(self), self.particles)


def enumerate_states(L: int, N: int) -> StateSpace:
    """All ``C(L, N)`` configurations in lexicographic order, sites 1..L."""
    if L < 1 or N < 0 or N > L:
        raise InvalidDimensions(f"need 0 <= N <= L and L >= 1, got L={L}, N={N}")
    if comb(L, N) > MAX_STATES:
        raise TooLarge(f"C({L},{N}) = {comb(L, N)} exceeds {MAX_STATES} states")
    configs = tuple(combinations(range(1, L + 1), N))
    return StateSpace(L, N, configs, {c: k for k, c in enumerate(configs)})


@dataclass(frozen=True)
class GeneratorMatrix:
    state_space: StateSpace
    hopping: HoppingRate
    entries: np.ndarray = field(repr=False, compare=False)


def build_generator(space: StateSpace, hopping) -> GeneratorMatrix:
    """Dense generator with ``du/dt = H u``; columns sum to zero.

    A particle at ``x`` hops to ``x + 1`` (mod L) with rate ``p`` and to
    ``x - 1`` with rate ``q`` if the target is empty.
    """
    hop = as_hopping(hopping)
    L = space.sites
    n = len(space)
    h = np.zeros((n, n), dtype=complex)
    for col, conf in enumerate(space.configurations):
        occupied = set(conf)
        for x in conf:
            for target, rate in ((x % L + 1, hop.p), ((x - 2) % L + 1, hop.q)):
                if target in occupied:
                    continue
                new = tuple(sorted((occupied - {x}) | {target}))
                h[space.index_of[new], col] += rate
                h[col, col] -= rate
    h.setflags(write=False)
    return GeneratorMatrix(space, hop, h)


def apply_generator(gen: GeneratorMatrix, vector) -> np.ndarray:
    v = np.asarray(vector, dtype=complex)
    if v.shape != (len(gen.state_space),):
        raise DimensionMismatch(f"vector length {v.shape} does not match {len(gen.state_space)} states")
    return gen.entries @ v


def shift_permutation(space: StateSpace) -> np.ndarray:
    """Index map of the rotation ``x -> x + 1`` (mod L) on configurations."""
    L = space.sites
    return np.array([space.index_of[tuple(sorted(x % L + 1 for x in c))]
                     for c in space.configurations], dtype=np.int64)
