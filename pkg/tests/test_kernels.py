import os
import subprocess
import sys

import numpy as np
import pytest

from bethe_asep import _purepy, kernels
from bethe_asep.bethe import reduced_residual

from .oracles import count_forests_brute

compiled_only = pytest.mark.skipif(kernels._compiled is None, reason="extension not built")


def _random_points(seed, count, n):
    rng = np.random.default_rng(seed)
    return (0.3 + 2.7 * rng.random((count, n))) * np.exp(2j * np.pi * rng.random((count, n)))


def test_reduced_jacobian_matches_finite_differences():
    for x in _random_points(3, 20, 3):
        g, jac = _purepy.reduced_system(x, 0.7, 5)
        h = 1e-6
        fd = np.zeros_like(jac)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd[:, k] = (_purepy.reduced_system(x + e, 0.7, 5)[0]
                        - _purepy.reduced_system(x - e, 0.7, 5)[0]) / (2 * h)
        assert np.abs(fd - jac).max() <= 1e-5 * np.abs(jac).max()


@compiled_only
def test_backends_agree_on_system():
    comp = kernels.get_backend("compiled")
    for n in (1, 2, 4):
        for x in _random_points(n, 10, n):
            a = comp.reduced_system(x, 0.3 + 0.1j, 6)
            b = _purepy.reduced_system(x, 0.3 + 0.1j, 6)
            assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-12)
            assert np.allclose(a[1], b[1], rtol=1e-12, atol=1e-12)


@compiled_only
def test_backends_agree_on_regular_newton_roots():
    comp = kernels.get_backend("compiled")
    starts = _random_points(11, 60, 3)
    xa, sa = comp.newton_batch(starts, 0.7, 5)
    xb, sb = _purepy.newton_batch(starts, 0.7, 5)
    both = (sa == 0) & (sb == 0)
    assert both.sum() > 20
    # away from the singular all-ones point the two agree to rounding
    regular = both & (np.abs(xa - 1).max(axis=1) > 1e-3)
    assert np.abs(xa[regular] - xb[regular]).max() < 1e-9


@compiled_only
def test_backends_agree_on_forests():
    comp = kernels.get_backend("compiled")
    cases = [([1] * n, [0] * n) for n in range(0, 8)] + [([2, 1, 3], [0, 1, 0]), ([3, 2, 2, 1], [1, 0, 1, 0])]
    for sizes, flags in cases:
        assert list(comp.forest_polynomial(sizes, flags)) == list(_purepy.forest_polynomial(sizes, flags))


def test_forest_polynomial_against_brute_force():
    for sizes, flags in [([1, 1, 1], [0, 0, 0]), ([2, 1, 3], [0, 1, 0]), ([1, 2, 2, 1], [1, 0, 0, 1])]:
        brute = count_forests_brute(sizes, flags)
        poly = kernels.forest_polynomial(sizes, flags)
        assert {k: c for k, c in enumerate(poly) if c} == brute


def test_newton_batch_threads_do_not_change_results():
    starts = _random_points(5, 200, 2)
    a = kernels.newton_batch(starts, 0.7, 4, threads=1)
    b = kernels.newton_batch(starts, 0.7, 4, threads=4)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_newton_batch_converged_points_solve_system():
    x, status = kernels.newton_batch(_random_points(9, 50, 3), 0.6, 4)
    for row in x[status == kernels.CONVERGED]:
        assert np.abs(reduced_residual(row, 0.6, 4)).max() < 1e-9


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("BETHE_ASEP_THREADS", "3")
    assert kernels.thread_count() == 3
    monkeypatch.setenv("BETHE_ASEP_THREADS", "0")
    assert kernels.thread_count() >= 1


def test_pure_python_switch():
    env = dict(os.environ, BETHE_ASEP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from bethe_asep import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_get_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
