import numpy as np
import pytest

from bethe_asep.asep import (
    HoppingRate,
    apply_generator,
    build_generator,
    enumerate_states,
    shift_permutation,
)
from bethe_asep.errors import DimensionMismatch, InvalidDimensions, TooLarge

from .oracles import dense_generator


def test_enumerate_states_examples():
    s = enumerate_states(4, 2)
    assert len(s) == 6
    assert s.configurations[0] == (1, 2) and s.configurations[-1] == (3, 4)
    assert enumerate_states(3, 1).configurations == ((1,), (2,), (3,))
    assert len(enumerate_states(5, 3)) == 10


def test_index_of_inverts_configurations():
    s = enumerate_states(6, 3)
    assert all(s.index_of[c] == k for k, c in enumerate(s.configurations))
    assert list(s.configurations) == sorted(s.configurations)


def test_enumerate_states_errors():
    with pytest.raises(InvalidDimensions):
        enumerate_states(2, 3)
    with pytest.raises(TooLarge):
        enumerate_states(20, 10)


def test_hopping_rate_q():
    h = HoppingRate(0.7)
    assert h.p + h.q == 1
    assert HoppingRate(0.3 + 0.2j).q == 0.7 - 0.2j


def test_two_site_generator():
    h = build_generator(enumerate_states(2, 1), 0.7).entries
    assert np.allclose(h, [[-1, 1], [1, -1]])


def test_full_ring_is_zero():
    assert np.all(build_generator(enumerate_states(4, 4), 0.3).entries == 0)


def test_three_site_circulant():
    h = build_generator(enumerate_states(3, 1), 0.7).entries
    expected = np.array([[-1, 0.3, 0.7], [0.7, -1, 0.3], [0.3, 0.7, -1]])
    assert np.allclose(h, expected)


def test_apply_generator():
    gen = build_generator(enumerate_states(2, 1), 0.7)
    assert np.allclose(apply_generator(gen, [1, 0]), [-1, 1])
    assert np.allclose(apply_generator(gen, [0, 0]), [0, 0])
    with pytest.raises(DimensionMismatch):
        apply_generator(gen, [1, 2, 3])


@pytest.mark.parametrize("L,N", [(4, 2), (5, 2), (5, 3), (6, 3), (7, 2)])
@pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1.0])
def test_generator_invariants(L, N, p):
    gen = build_generator(enumerate_states(L, N), p)
    h = gen.entries
    assert np.abs(h.sum(axis=0)).max() < 1e-12
    assert np.abs(apply_generator(gen, np.ones(len(gen.state_space)))).max() < 1e-12
    off = h - np.diag(np.diag(h))
    vals = {round(v.real, 12) for v in off.ravel()}
    assert vals <= {0.0, round(p, 12), round(1 - p, 12), 1.0}
    # translation invariance
    perm = shift_permutation(gen.state_space)
    assert np.allclose(h[np.ix_(perm, perm)], h, atol=1e-14)
    assert abs(np.trace(h).imag) == 0


@pytest.mark.parametrize("L,N", [(4, 2), (5, 3), (6, 2)])
def test_generator_matches_independent_construction(L, N):
    p = 0.3 + 0.1j
    assert np.allclose(build_generator(enumerate_states(L, N), p).entries, dense_generator(L, N, p))


def test_trace_counts_movable_pairs():
    space = enumerate_states(5, 2)
    h = build_generator(space, 0.6).entries
    movable = 0
    for c in space.configurations:
        occ = set(c)
        movable += sum(1 for x in c if x % 5 + 1 not in occ)
    assert np.trace(h) == pytest.approx(-movable)


def test_generator_is_read_only():
    h = build_generator(enumerate_states(3, 1), 0.5).entries
    with pytest.raises(ValueError):
        h[0, 0] = 1
