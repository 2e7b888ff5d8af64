import math

import numpy as np
import pytest

from bethe_asep.asep import build_generator, enumerate_states
from bethe_asep.bethe import BetheRoot, dedup_up_to_permutation, solve_general, solve_two_particle
from bethe_asep.errors import ZeroComponent, ZeroVector
from bethe_asep.spectrum import (
    amplitudes,
    boundary_check,
    build_eigenvector,
    build_state,
    certify,
    eigenvalue,
    state_residual,
)


def _regular_states(L, N, p):
    space = enumerate_states(L, N)
    sol = dedup_up_to_permutation(solve_general(L, N, p))
    return space, [build_state(r, space, p) for r in sol.admissible_roots()]


def test_single_particle_plane_wave():
    space = enumerate_states(4, 1)
    u = build_eigenvector([1j], space, 0.7)
    assert np.allclose(u, [1j ** x / 1j for x in range(1, 5)])
    assert eigenvalue([1j], 0.7) == pytest.approx(0.7 / 1j + 0.3j - 1)


def test_stationary_state_is_uniform():
    space = enumerate_states(5, 3)
    u = build_eigenvector(BetheRoot((1, 1, 1)), space, 0.7)
    assert np.allclose(u, 1)
    assert eigenvalue([1, 1, 1], 0.7) == 0


def test_amplitudes_identity_is_one():
    amps = amplitudes([0.5 + 0.1j, 1.3j, -0.8], 0.6)
    assert amps[(0, 1, 2)] == 1
    assert len(amps) == 6


@pytest.mark.parametrize("L,N", [(4, 2), (5, 3), (6, 3), (5, 4)])
def test_bethe_states_are_eigenvectors(L, N):
    p = 0.7
    space, states = _regular_states(L, N, p)
    gen = build_generator(space, p)
    assert len(states) == math.comb(L, N)
    for s in states:
        assert state_residual(s, gen) < 1e-8
        assert boundary_check(s, p) < 1e-9


def test_boundary_check_detects_wrong_amplitudes():
    p = 0.7
    space, states = _regular_states(5, 2, p)
    s = next(s for s in states if not np.allclose(s.root.array, 1))
    broken = dict(s.amplitudes)
    broken[(1, 0)] *= 1.1
    bad = type(s)(s.root, broken, s.vector, s.eigenvalue, s.normalizer)
    assert boundary_check(bad, p) > 1e-4


def test_coincident_roots_give_zero_vector():
    rng = np.random.default_rng(12)
    for t in range(50):
        N = 2 + t % 2
        c = (0.3 + 2.5 * rng.random()) * np.exp(2j * np.pi * rng.random())
        x = [c, c] + [complex(rng.normal(), rng.normal())] * (N - 2)
        rng.shuffle(x)
        with pytest.raises(ZeroVector):
            build_eigenvector(x, enumerate_states(6, N), 0.7)


def test_two_particle_inadmissible_roots_give_zero_vector():
    for L in range(3, 9):
        space = enumerate_states(L, 2)
        for root, adm in solve_two_particle(L, 0.7).roots:
            if not adm.admissible:
                with pytest.raises(ZeroVector):
                    build_eigenvector(root, space, 0.7)


def test_eigenvalue_rejects_zero_component():
    with pytest.raises(ZeroComponent):
        eigenvalue([0.0, 1.0], 0.7)


@pytest.mark.parametrize("L,N,p", [(4, 2, 0.7), (5, 1, 0.3), (4, 3, 0.6), (5, 3, 0.7),
                                   (6, 3, 0.7), (5, 4, 0.7), (8, 2, 0.7), (6, 5, 0.7)])
def test_certify_complete(L, N, p):
    cert = certify(L, N, p)
    assert cert.complete, cert.reason
    assert cert.eigenstate_count == math.comb(L, N)
    assert cert.max_residual < 1e-8
    assert cert.trace_check[2] < 1e-6 * (1 + abs(cert.trace_check[1]))
    assert cert.trace_sq_check[2] < 1e-6 * (1 + abs(cert.trace_sq_check[1]))


def test_certify_complex_hopping():
    cert = certify(5, 2, 0.3 + 0.2j)
    assert cert.complete, cert.reason


def test_certify_reports_incomplete_on_small_budget():
    cert = certify(6, 3, 0.7, budget=2)
    assert not cert.complete
    assert "expected" in cert.reason


def test_certified_spectrum_matches_dense():
    L, N, p = 6, 3, 0.7
    cert = certify(L, N, p)
    dense = np.linalg.eigvals(build_generator(enumerate_states(L, N), p).entries)
    for ev in cert.eigenvalues:
        assert np.abs(dense - ev).min() < 1e-8
