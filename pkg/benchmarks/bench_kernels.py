"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from bethe_asep import _purepy, kernels


def _starts(count, n, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0.09, 9.0, size=(count, n)))
    return r * np.exp(2j * np.pi * rng.random((count, n)))


def _cases():
    starts3 = _starts(256, 3)
    starts4 = _starts(128, 4)
    yield "newton_batch L=6 N=3 (256 starts)", lambda b: b.newton_batch(starts3, 0.7, 6)
    yield "newton_batch L=8 N=4 (128 starts)", lambda b: b.newton_batch(starts4, 0.7, 8)
    yield "forest_polynomial 7 unit vertices", lambda b: b.forest_polynomial([1] * 7, [0] * 7)
    yield "forest_polynomial mixed 6 vertices", lambda b: b.forest_polynomial([2, 1, 3, 1, 2, 1],
                                                                           [0, 1, 0, 0, 1, 0])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels._compiled is None:
        print("compiled extension not available; only the pure-Python backend can run")
        return
    backends = {"compiled": kernels.get_backend("compiled"), "python": _purepy}
    print(f"{'case':40s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn in _cases():
        t = {k: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
             for k, b in backends.items()}
        print(f"{name:40s} {t['compiled']:13.4f} {t['python']:11.4f} {t['python'] / t['compiled']:8.1f}x")


if __name__ == "__main__":
    main()
