import numpy as np
import pytest

from bethe_asep.asep import build_generator, enumerate_states
from bethe_asep.errors import ChainDegenerate, InvalidDimensions, InvalidHopping, PathLost
from bethe_asep.ramify import (
    RamificationEvent,
    chain_from_family,
    class_gap,
    find_ramification,
    jordan_block,
    jordan_chain,
    sector_discriminant,
    sector_gap,
    sylvester_resultant,
    track_path,
)


def _toy(lam, mu, a):
    def matrix(t):
        return np.array([[lam(t), a(t)], [0, mu(t)]], dtype=complex)

    def branches(t):
        # eigenvectors pinned on the first component
        return ((lam(t), np.array([1, 0], dtype=complex)),
                (mu(t), np.array([1, (mu(t) - lam(t)) / a(t)], dtype=complex)))

    return matrix, branches


def test_toy_family_gives_jordan_block():
    matrix, branches = _toy(lambda t: 2 + t, lambda t: 2 - t * t - t, lambda t: 3 + t)
    chain = chain_from_family(matrix, branches, 0.0)
    block = jordan_block(chain, matrix(0.0))
    assert np.abs(block - np.array([[2, 1], [0, 2]])).max() < 1e-6
    assert chain.first_order_residual < 1e-4
    assert chain.second_order_residual < 1e-6


def test_toy_family_without_splitting_is_degenerate():
    matrix, branches = _toy(lambda t: 2 + t, lambda t: 2 + t, lambda t: 1.0)
    with pytest.raises(ChainDegenerate):
        chain_from_family(matrix, branches, 0.0)


def test_sylvester_resultant_detects_common_root():
    # (x-1)(x-2) and (x-1)(x+3) share x = 1
    assert abs(sylvester_resultant([2, -3, 1], [-3, 2, 1])) < 1e-12
    assert abs(sylvester_resultant([2, -3, 1], [3, 4, 1])) > 1


@pytest.fixture(scope="module")
def events_l4():
    return find_ramification(4, 2)


def test_l4_events(events_l4):
    assert len(events_l4) >= 1
    reals = sorted(e.p_r.real for e in events_l4)
    expected = sorted([0.5 - np.sqrt(2) / 8, 0.5 + np.sqrt(2) / 8])
    assert np.allclose(reals, expected, atol=1e-8)
    for e in events_l4:
        assert e.discriminant < 1e-8
        assert len(e.colliding_indices) == 2
        assert sector_discriminant(4, e.p_r, e.sector) < 1e-8


def test_l4_events_are_isolated(events_l4):
    for e in events_l4:
        for dp in (1e-2, -1e-2, 1e-2j):
            assert sector_gap(4, e.p_r + dp)[0] > 1e-3


def test_l4_jordan_chain(events_l4):
    for e in events_l4:
        chain = jordan_chain(e)
        assert chain.first_order_residual <= 1e-4
        assert chain.second_order_residual <= 1e-6
        assert abs(chain.coupling) > 1e-6
        h = build_generator(enumerate_states(4, 2), e.p_r).entries
        k = h - chain.eigenvalue * np.eye(h.shape[0])
        w = chain.generalized_vector
        # applying (H - E) twice shrinks by at least four orders of magnitude
        assert np.abs(k @ k @ w).max() <= 1e-4 * np.abs(k @ w).max()
        block = jordan_block(chain, h)
        assert abs(block[0, 1] - 1) < 1e-6 and abs(block[1, 0]) < 1e-6


def test_jordan_chain_rejects_small_cluster():
    with pytest.raises(ChainDegenerate):
        jordan_chain(RamificationEvent(0.3, frozenset({0}), 0.0, 4, 2, 2, 0.5))


def test_l3_has_no_events_and_gap_floor():
    assert find_ramification(3, 2) == []
    gaps = [sector_gap(3, complex(x, y))[0] for x in np.linspace(-0.2, 1.2, 9)
            for y in np.linspace(-0.7, 0.7, 9) if abs(complex(x, y) - 0.5) > 0.05
            and abs(x) + abs(y) > 0.05 and abs(complex(x, y) - 1) > 0.05]
    assert min(gaps) > 1e-3


def test_single_particle_has_no_events():
    assert find_ramification(5, 1) == []


def test_find_ramification_rejects_large_n():
    with pytest.raises(InvalidDimensions):
        find_ramification(5, 3)


def test_track_path_preserves_count():
    samples = track_path(4, 2, 0.9, 0.1 + 0.2j, 20)
    counts = {len(s.roots.roots) for s in samples}
    assert counts == {12}
    assert all(s.roots.admissible_count == 12 for s in samples)
    assert all(s.min_pairwise_gap > 1e-6 for s in samples)


def test_track_path_single_particle():
    samples = track_path(5, 1, 0.6, 0.9, 6)
    assert all(s.roots.admissible_count == 5 for s in samples)


def test_track_path_through_ramification_is_lost():
    # the real segment crosses p_r = 1/2 + sqrt(2)/8
    with pytest.raises(PathLost):
        track_path(4, 2, 0.9, 0.55, 20)


def test_track_path_rejects_excluded_points():
    with pytest.raises(InvalidHopping):
        track_path(4, 2, 0.9, 0.1, 20)


def test_class_gap():
    assert class_gap([np.array([1, 2]), np.array([2, 1.5])]) == pytest.approx(0.5)
