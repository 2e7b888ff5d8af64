"""Numerical and combinatorial checks of Bethe ansatz completeness for the periodic ASEP."""
from .asep import HoppingRate, StateSpace, build_generator, enumerate_states
from .bethe import (
    BetheRoot,
    SolutionSet,
    classify,
    cleared_residual,
    dedup_up_to_permutation,
    solve_general,
    solve_two_particle,
)
from .forests import CountPolynomial, admissible_count, involution_check, lefschetz_total
from .kernels import BACKEND
from .ramify import find_ramification, jordan_chain, track_path
from .spectrum import build_eigenvector, certify

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BetheRoot",
    "CountPolynomial",
    "HoppingRate",
    "SolutionSet",
    "StateSpace",
    "admissible_count",
    "build_eigenvector",
    "build_generator",
    "certify",
    "classify",
    "cleared_residual",
    "dedup_up_to_permutation",
    "enumerate_states",
    "find_ramification",
    "involution_check",
    "jordan_chain",
    "lefschetz_total",
    "solve_general",
    "solve_two_particle",
    "track_path",
]
