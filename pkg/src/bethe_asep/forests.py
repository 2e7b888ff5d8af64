"""Exact combinatorics behind the admissible-root count.

Planted forests, enhanced partitions, their weights and forest polynomials,
and the sign-reversing involution that collapses the inclusion-exclusion sum
to signed Stirling numbers. Integer arithmetic only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from math import factorial

from . import kernels
from .errors import IdentityViolation, InvolutionBroken, TooLarge


# -- polynomials ---------------------------------------------------------------------

class CountPolynomial:
    """Integer polynomial in the formal variable L, ascending coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients=()):
        coeffs = [int(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @classmethod
    def monomial(cls, degree: int, coefficient: int = 1) -> "CountPolynomial":
        return cls([0] * degree + [coefficient])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, L: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * L + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coefficients), len(other.coefficients))
        a = self.coefficients + (0,) * (n - len(self.coefficients))
        b = other.coefficients + (0,) * (n - len(other.coefficients))
        return CountPolynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return CountPolynomial(-c for c in self.coefficients)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coefficients or not other.coefficients:
            return CountPolynomial()
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return CountPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, CountPolynomial)):
            return self.coefficients == _as_poly(other).coefficients
        return NotImplemented

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"CountPolynomial({list(self.coefficients)})"

    def __str__(self):
        terms = []
        for k in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            mag = abs(c)
            var = "" if k == 0 else ("L" if k == 1 else f"L^{k}")
            body = str(mag) if (mag != 1 or k == 0) else ""
            body += var
            if not terms:
                terms.append(("-" if c < 0 else "") + body)
            else:
                terms.append(("- " if c < 0 else "+ ") + body)
        return " ".join(terms) if terms else "0"

    def to_strings(self) -> list[str]:
        """Decimal-string coefficients, for lossless serialization."""
        return [str(c) for c in self.coefficients]


def _as_poly(x) -> CountPolynomial:
    return x if isinstance(x, CountPolynomial) else CountPolynomial([x])


def falling_factorial_polynomial(N: int) -> CountPolynomial:
    """L (L-1) ... (L-N+1)."""
    poly = CountPolynomial([1])
    for k in range(N):
        poly = poly * CountPolynomial([-k, 1])
    return poly


def stirling_first(N: int, k: int) -> int:
    """Signed Stirling number of the first kind s(N, k)."""
    if not 0 <= k <= N:
        raise ValueError("need 0 <= k <= N")
    return _stirling_row(N)[k]


@lru_cache(maxsize=None)
def _stirling_row(N: int) -> tuple[int, ...]:
    row = [1]
    for n in range(N):
        # s(n+1, k) = s(n, k-1) - n s(n, k)
        row = [(row[k - 1] if k >= 1 else 0) - n * (row[k] if k < len(row) else 0)
               for k in range(n + 2)]
    return tuple(row)


# -- planted forests -----------------------------------------------------------------

MAX_FOREST_VERTICES = 8


@dataclass(frozen=True)
class PlantedForest:
    vertices: tuple
    sizes: tuple[int, ...]
    edges: tuple[tuple, ...]
    roots: frozenset

    @property
    def components(self) -> int:
        return len(self.roots)


def _parent_functions(n: int, root_only):
    """Yield acyclic parent arrays (-1 marks a root)."""
    parent = [-1] * n

    def closes_cycle(v):
        u = parent[v]
        while u != -1 and u <= v:
            if u == v:
                return True
            u = parent[u]
        return False

    def visit(v):
        if v == n:
            yield tuple(parent)
            return
        parent[v] = -1
        yield from visit(v + 1)
        if not root_only[v]:
            for u in range(n):
                if u == v:
                    continue
                parent[v] = u
                if not closes_cycle(v):
                    yield from visit(v + 1)
        parent[v] = -1

    yield from visit(0)


def enumerate_planted_forests(vertex_spec) -> list[PlantedForest]:
    """All planted forests on ``(label, size, root_only)`` vertices."""
    spec = list(vertex_spec)
    if len(spec) > MAX_FOREST_VERTICES:
        raise TooLarge(f"at most {MAX_FOREST_VERTICES} vertices supported")
    labels = tuple(s[0] for s in spec)
    sizes = tuple(int(s[1]) for s in spec)
    flags = [bool(s[2]) for s in spec]
    out = []
    for parent in _parent_functions(len(spec), flags):
        edges = tuple((labels[u], labels[v]) for v, u in enumerate(parent) if u != -1)
        roots = frozenset(labels[v] for v, u in enumerate(parent) if u == -1)
        out.append(PlantedForest(labels, sizes, edges, roots))
    return out


def multiplicity(forest: PlantedForest) -> int:
    """Product over edges (a, b) of the size of the parent a."""
    size_of = dict(zip(forest.vertices, forest.sizes))
    m = 1
    for a, _ in forest.edges:
        m *= size_of[a]
    return m


def forest_sum(sizes, root_only) -> CountPolynomial:
    """Sum of m(f) L^{n(f)} over forests; computed by the fast kernel."""
    if len(sizes) > MAX_FOREST_VERTICES:
        raise TooLarge(f"at most {MAX_FOREST_VERTICES} vertices supported")
    return CountPolynomial(kernels.forest_polynomial(list(sizes), [int(bool(r)) for r in root_only]))


def lefschetz_total(N: int) -> CountPolynomial:
    """Sum over planted forests on N unit vertices of L^{#components}."""
    if N > 7:
        raise TooLarge("lefschetz_total supports N <= 7")
    return forest_sum([1] * N, [False] * N)


# -- enhanced partitions ----------------------------------------------------------------

@dataclass(frozen=True)
class EnhancedPartition:
    """Coincidence sets ``a_sets`` and zero/pole pairs ``b_triples = ((B, Bbar), ...)``.

    Elements are 1-based. Both B and Bbar are non-empty.
    """

    a_sets: tuple[frozenset, ...]
    b_triples: tuple[tuple[frozenset, frozenset], ...] = ()

    def __post_init__(self):
        a = tuple(sorted((frozenset(s) for s in self.a_sets), key=min))
        b = tuple(sorted(((frozenset(x), frozenset(y)) for x, y in self.b_triples),
                         key=lambda t: min(t[0] | t[1])))
        object.__setattr__(self, "a_sets", a)
        object.__setattr__(self, "b_triples", b)
        seen = set()
        for s in list(a) + [x | y for x, y in b]:
            if not s or seen & s:
                raise ValueError("sets must be non-empty and pairwise disjoint")
            seen |= s
        for x, y in b:
            if not x or not y or x & y:
                raise ValueError("B and Bbar must be non-empty and disjoint")
        if seen != set(range(1, len(seen) + 1)):
            raise ValueError("sets must cover 1..N")

    @property
    def N(self) -> int:
        return sum(len(s) for s in self.a_sets) + sum(len(x | y) for x, y in self.b_triples)

    @property
    def blocks(self) -> list[frozenset]:
        return list(self.a_sets) + [x | y for x, y in self.b_triples]

    @property
    def is_trivial(self) -> bool:
        return not self.b_triples and all(len(s) == 1 for s in self.a_sets)

    @classmethod
    def trivial(cls, N: int) -> "EnhancedPartition":
        return cls(tuple(frozenset([i]) for i in range(1, N + 1)))

    def describe(self) -> str:
        fmt = lambda s: "{" + ",".join(map(str, sorted(s))) + "}"
        a = ", ".join(fmt(s) for s in self.a_sets)
        b = ", ".join(f"({fmt(x)},{fmt(y)})" for x, y in self.b_triples)
        return f"A=[{a}] B=[{b}]"


def set_partitions(elements):
    """All set partitions of a sequence, as lists of tuples (restricted growth order)."""
    elements = list(elements)
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for part in set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1:]


def _splits(block):
    """Ordered (B, Bbar) splits of a block with both sides non-empty."""
    block = tuple(block)
    for r in range(1, len(block)):
        for b in combinations(block, r):
            yield frozenset(b), frozenset(block) - frozenset(b)


def enumerate_enhanced_partitions(N: int) -> list[EnhancedPartition]:
    if N > 7:
        raise TooLarge("enhanced partitions supported for N <= 7")
    out = []
    for part in set_partitions(range(1, N + 1)):
        options = [[("A", frozenset(b))] + [("B", s) for s in _splits(b)] for b in part]
        for choice in product(*options):
            a = [v for kind, v in choice if kind == "A"]
            b = [v for kind, v in choice if kind == "B"]
            out.append(EnhancedPartition(tuple(a), tuple(b)))
    return out


def set_weight(size: int) -> int:
    """omega(S) = (-1)^{|S|-1} (|S|-1)!."""
    return (-1) ** (size - 1) * factorial(size - 1)


def weight(partition: EnhancedPartition) -> int:
    w = 1
    for s in partition.blocks:
        w *= set_weight(len(s))
    return w


@lru_cache(maxsize=None)
def _lambda_cached(shape: tuple[tuple[int, bool], ...]) -> CountPolynomial:
    return forest_sum([s for s, _ in shape], [r for _, r in shape])


def lambda_count(partition: EnhancedPartition, labeled: bool = False) -> CountPolynomial:
    """Sum over forests on A- and B-vertices of m(f) L^{n(f)}; B-vertices are roots only.

    With ``labeled=True`` the exponent is n(f) - |B| (one fixed label per B-vertex).
    """
    shape = tuple(sorted([(len(s), False) for s in partition.a_sets]
                         + [(len(x | y), True) for x, y in partition.b_triples]))
    poly = _lambda_cached(shape)
    if labeled:
        shift = len(partition.b_triples)
        poly = CountPolynomial(poly.coefficients[shift:])
    return poly


def admissible_count(N: int) -> CountPolynomial:
    """Inclusion-exclusion over enhanced partitions; checked against L(L-1)...(L-N+1)."""
    if N > 6:
        raise TooLarge("admissible_count supports N <= 6")
    total = CountPolynomial()
    for part in enumerate_enhanced_partitions(N):
        total = total + weight(part) * lambda_count(part)
    expected = falling_factorial_polynomial(N)
    if total != expected:
        raise IdentityViolation(f"admissible count {total} differs from {expected}")
    return total


def inadmissible_report_two_particles() -> dict:
    """Per-label subvariety counts for N=2, in units of the number of labels L.

    Each label i contributes one point for xi_1 = alpha_i (forcing xi_2 =
    beta_i), one for xi_2 = alpha_i, and the diagonal xi_1 = xi_2 contributes
    L. The three families sum to 3L.
    """
    rows = {"xi1=xi2": CountPolynomial([0, 1]),
            "xi1=alpha_i": CountPolynomial([0, 1]),
            "xi2=alpha_i": CountPolynomial([0, 1])}
    rows["total"] = sum(rows.values(), CountPolynomial())
    return rows


def refinement_images(base: EnhancedPartition) -> list[EnhancedPartition]:
    """Enhanced partitions obtained from refinements of ``base``.

    Each refinement block S is compared with B' (the union of the B sides):
    disjoint from or inside B' gives an A-set, otherwise S becomes the pair
    (S & B', S - B').
    """
    b_prime = frozenset().union(*[x for x, _ in base.b_triples]) if base.b_triples else frozenset()
    out = []
    for pieces in product(*[list(set_partitions(sorted(b))) for b in base.blocks]):
        a, b = [], []
        for part in pieces:
            for s in map(frozenset, part):
                if not (s & b_prime) or s <= b_prime:
                    a.append(s)
                else:
                    b.append((s & b_prime, s - b_prime))
        out.append(EnhancedPartition(tuple(a), tuple(b)))
    return out


def weight_sum_check(base: EnhancedPartition) -> int:
    """Sum of weights over the refinement images of ``base`` (1 if trivial, else 0)."""
    if base.N > 6:
        raise TooLarge("weight_sum_check supports N <= 6")
    return sum(weight(p) for p in refinement_images(base))


# -- sign-reversing involution ------------------------------------------------------------
#
# An object is a permutation of 0..N-1 (successor map), a forest on its cycles
# whose edges carry an element of the parent cycle, and marks on root cycles
# (a non-empty proper subset, or none). Its weight is sign(pi) L^{#roots}.
# Summed over all objects this equals the inclusion-exclusion total.

@dataclass(frozen=True)
class CycleForest:
    succ: tuple[int, ...]
    up: tuple[int, ...]        # per cycle minimum: parent label, -1 for a root; -2 elsewhere
    marks: frozenset = frozenset()

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(len(self.succ)):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            nxt = self.succ[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.succ[nxt]
            out.append(tuple(cyc))
        return out

    def cycle_of(self) -> list[int]:
        owner = [0] * len(self.succ)
        for cyc in self.cycles():
            for e in cyc:
                owner[e] = min(cyc)
        return owner

    def sign(self) -> int:
        n = len(self.succ)
        return (-1) ** (n - len(self.cycles()))

    def roots(self) -> int:
        return sum(1 for v in self.up if v == -1)

    def weight(self) -> tuple[int, int]:
        """(sign, exponent of L)."""
        return self.sign(), self.roots()


def _forest_assignments(cycles):
    """Parent labels per cycle: -1 or an element of another cycle, acyclic."""
    k = len(cycles)
    owner = {}
    for idx, cyc in enumerate(cycles):
        for e in cyc:
            owner[e] = idx
    for parents in _parent_functions(k, [False] * k):
        choices = [[-1] if u == -1 else list(cycles[u]) for u in parents]
        for labels in product(*choices):
            yield parents, labels


def enumerate_cycle_forests(N: int) -> list[CycleForest]:
    out = []
    for perm in permutations(range(N)):
        succ = tuple(perm)
        base = CycleForest(succ, tuple([-2] * N))
        cycles = [tuple(sorted(c)) for c in base.cycles()]
        for _, labels in _forest_assignments(cycles):
            up = [-2] * N
            for cyc, lab in zip(cycles, labels):
                up[min(cyc)] = lab
            root_cycles = [c for c, lab in zip(cycles, labels) if lab == -1]
            mark_options = [[frozenset()] + [frozenset(s) for r in range(1, len(c))
                                             for s in combinations(c, r)] for c in root_cycles]
            for marks in product(*mark_options):
                out.append(CycleForest(succ, tuple(up), frozenset().union(*marks) if marks else frozenset()))
    return out


def _eligible(obj: CycleForest) -> int | None:
    owner = obj.cycle_of()
    sizes = {}
    for e, m in enumerate(owner):
        sizes[m] = sizes.get(m, 0) + 1
    for e in range(len(obj.succ)):
        m = owner[e]
        is_root = obj.up[m] == -1
        if sizes[m] == 1:
            if not is_root:
                return e
        elif e not in obj.marks:
            marked_root = is_root and any(owner[x] == m for x in obj.marks)
            if not is_root or marked_root:
                return e
    return None


def involution(obj: CycleForest) -> CycleForest | None:
    """Contract or extend at the smallest eligible element; None for survivors."""
    s = _eligible(obj)
    if s is None:
        return None
    owner = obj.cycle_of()
    succ = list(obj.succ)
    up = list(obj.up)
    marks = set(obj.marks)
    if succ[s] == s:
        # contraction: slot s into the parent cycle right after its label
        e = obj.up[s]
        target = owner[e]
        target_members = [x for x in range(len(succ)) if owner[x] == target]
        succ[s] = succ[e]
        succ[e] = s
        up[s] = -2
        new_min = min(target, s)
        up[new_min], up[max(target, s)] = obj.up[target], -2
        if obj.up[target] == -1 and not any(owner[x] == target for x in obj.marks):
            marks.update(target_members)
    else:
        # extension: pull s out as a singleton child labelled by its predecessor
        c = owner[s]
        pred = next(x for x in range(len(succ)) if succ[x] == s)
        succ[pred] = succ[s]
        succ[s] = s
        rest = [x for x in range(len(succ)) if owner[x] == c and x != s]
        up_c = obj.up[c]
        up[c] = -2
        up[min(rest)] = up_c
        up[s] = pred
        if up_c == -1 and all(x in marks for x in rest):
            marks.difference_update(rest)
    return CycleForest(tuple(succ), tuple(up), frozenset(marks))


@dataclass(frozen=True)
class InvolutionReport:
    N: int
    objects: int
    cancelled_pairs: int
    survivors: int
    survivor_total: CountPolynomial
    total: CountPolynomial
    passed: bool
    counterexample: CycleForest | None = field(default=None, repr=False)


def involution_check(N: int) -> InvolutionReport:
    """Check the involution is sign-reversing, weight-preserving and fixed-point free.

    Survivors (no eligible element) must total sum_k s(N, k) L^k, and all
    objects together must total the inclusion-exclusion sum.
    """
    if N > 5:
        raise TooLarge("involution_check supports N <= 5")
    objs = enumerate_cycle_forests(N)
    universe = set(objs)
    total = CountPolynomial()
    survivor_total = CountPolynomial()
    survivors = pairs = 0
    for obj in objs:
        sign, exp = obj.weight()
        total = total + CountPolynomial.monomial(exp, sign)
        img = involution(obj)
        if img is None:
            survivors += 1
            survivor_total = survivor_total + CountPolynomial.monomial(exp, sign)
            if obj.marks or any(v >= 0 for v in obj.up):
                raise InvolutionBroken("survivor with marks or edges", obj)
            continue
        if img not in universe or img == obj:
            raise InvolutionBroken("image is not a distinct valid object", obj)
        if involution(img) != obj:
            raise InvolutionBroken("map is not an involution", obj)
        isign, iexp = img.weight()
        if isign != -sign or iexp != exp:
            raise InvolutionBroken("map does not reverse the sign", obj)
        pairs += 1
    stirling = CountPolynomial([stirling_first(N, k) for k in range(N + 1)])
    if survivor_total != stirling:
        raise InvolutionBroken(f"survivor total {survivor_total} differs from {stirling}")
    if total != falling_factorial_polynomial(N):
        raise InvolutionBroken(f"object total {total} differs from the falling factorial")
    return InvolutionReport(N, len(objs), pairs // 2, survivors, survivor_total, total, True)
