"""Gaussian deconvolution on Z^d: Python bindings to the C++ core."""

from ._core import (
    InvariantError,
    PreconditionError,
    a_d,
    admissible_s,
    c_delta,
    critical_constants,
    deconvolve,
    error_term_holder_curve,
    green,
    model_kernel,
    set_threads,
)

__all__ = [
    "InvariantError",
    "PreconditionError",
    "a_d",
    "admissible_s",
    "c_delta",
    "critical_constants",
    "deconvolve",
    "error_term_holder_curve",
    "green",
    "model_kernel",
    "set_threads",
]
