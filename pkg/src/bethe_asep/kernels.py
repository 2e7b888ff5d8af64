"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when
``BETHE_ASEP_PURE_PYTHON=1`` is set, the pure-Python module takes over.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from types import ModuleType

import numpy as np

from . import _purepy


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()

if os.environ.get("BETHE_ASEP_PURE_PYTHON", "") == "1" or _compiled is None:
    backend: ModuleType = _purepy
else:
    backend = _compiled

BACKEND = backend.BACKEND
CONVERGED, NO_CONVERGENCE, SINGULAR = 0, 1, 2


def get_backend(name: str) -> ModuleType:
    """Return a specific backend by name (``"compiled"`` or ``"python"``)."""
    if name == "python":
        return _purepy
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def thread_count() -> int:
    """Worker threads from ``BETHE_ASEP_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("BETHE_ASEP_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def reduced_system(xi, p, L):
    return backend.reduced_system(xi, complex(p), int(L))


def forest_polynomial(sizes, root_only) -> list[int]:
    return [int(c) for c in backend.forest_polynomial(sizes, root_only)]


def newton_batch(starts, p, L, *, threads: int | None = None, **options):
    """Batched Newton; rows are split over threads and reassembled in order.

    Results do not depend on the thread count because each row is an
    independent computation.
    """
    starts = np.ascontiguousarray(starts, dtype=complex)
    threads = thread_count() if threads is None else max(1, threads)
    if backend is _purepy or threads == 1 or starts.shape[0] < 2 * threads:
        return backend.newton_batch(starts, complex(p), int(L), **options)
    pieces = np.array_split(np.arange(starts.shape[0]), threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(
            lambda idx: backend.newton_batch(starts[idx], complex(p), int(L), **options),
            pieces))
    return (np.concatenate([x for x, _ in parts]),
            np.concatenate([s for _, s in parts]))
