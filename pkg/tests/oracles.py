"""Independent brute-force oracles used to cross-check the package.

Nothing here imports the code under test.
"""
from itertools import product
from math import comb, factorial

import numpy as np


def count_forests_brute(sizes, root_only):
    """Dict roots -> sum of multiplicities, over all parent functions."""
    n = len(sizes)
    out = {}
    choices = [[None] if root_only[v] else [None] + [u for u in range(n) if u != v] for v in range(n)]
    for parent in product(*choices):
        ok = True
        for v in range(n):
            seen = set()
            u = v
            while u is not None:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = parent[u]
            if not ok:
                break
        if not ok:
            continue
        m = 1
        for v, u in enumerate(parent):
            if u is not None:
                m *= sizes[u]
        roots = sum(1 for u in parent if u is None)
        out[roots] = out.get(roots, 0) + m
    return out


def generalized_cayley(sizes, root_only):
    """sum_f m(f) L^{n(f)} from the weighted Cayley formula.

    For a root set R the weighted forest count is (sum_{r in R} w_r) W^{n-|R|-1}
    with W = sum of all weights (and 1 when R is everything).
    """
    n = len(sizes)
    W = sum(sizes)
    out = {}
    free = [v for v in range(n) if not root_only[v]]
    forced = [v for v in range(n) if root_only[v]]
    for mask in range(1 << len(free)):
        roots = forced + [free[i] for i in range(len(free)) if mask >> i & 1]
        if not roots:
            continue
        k = len(roots)
        val = 1 if k == n else sum(sizes[r] for r in roots) * W ** (n - k - 1)
        out[k] = out.get(k, 0) + val
    return out


def enhanced_partition_census(N):
    """Count enhanced partitions by labelling each element with (block, side).

    Blocks are identified by their minimum element; side 0 is an A-set, sides
    1/2 are B/Bbar. Every labelling is checked for consistency directly.
    """
    count = 0
    elems = list(range(N))
    for blocks in product(range(N), repeat=N):
        # block id must be the minimum of its block
        if any(blocks[blocks[i]] != blocks[i] or blocks[i] > i for i in elems):
            continue
        for sides in product(range(3), repeat=N):
            ok = True
            for b in set(blocks):
                members = [i for i in elems if blocks[i] == b]
                s = {sides[i] for i in members}
                if 0 in s and s != {0}:
                    ok = False
                if 0 not in s and s != {1, 2}:
                    ok = False
            if ok:
                count += 1
    return count


def falling(L, N):
    return factorial(L) // factorial(L - N) if L >= N else 0


def dense_generator(L, N, p):
    """Generator built from bit strings, independent of the package layout."""
    q = 1 - p
    states = [s for s in range(1 << L) if bin(s).count("1") == N]
    # lexicographic order of occupied-site tuples
    key = lambda s: tuple(i + 1 for i in range(L) if s >> i & 1)
    states.sort(key=key)
    index = {s: k for k, s in enumerate(states)}
    h = np.zeros((len(states), len(states)), dtype=complex)
    for s in states:
        for i in range(L):
            if not s >> i & 1:
                continue
            for j, rate in (((i + 1) % L, p), ((i - 1) % L, q)):
                if s >> j & 1:
                    continue
                t = s & ~(1 << i) | (1 << j)
                h[index[t], index[s]] += rate
                h[index[s], index[s]] -= rate
    assert h.shape[0] == comb(L, N)
    return h
