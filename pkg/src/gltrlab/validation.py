"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .problem import SymOperator, TrsProblem, as_operator

__all__ = ["check_problem", "check_positive", "check_vector"]


def check_positive(value, name, allow_none=False):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_vector(v, name, n=None) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_problem(A, g=None, delta=None) -> TrsProblem:
    """Build a :class:`TrsProblem` from estimator-style arguments.

    ``A`` may already be a ``TrsProblem`` (then ``g`` must be omitted and
    ``delta``, if given, overrides its radius), a ``SymOperator``, a 1-d array
    of diagonal entries, or a dense symmetric 2-d array.
    """
    if isinstance(A, TrsProblem):
        if g is not None:
            raise ValueError("pass either a TrsProblem or (A, g), not both")
        if delta is None or delta == A.delta:
            return A
        return TrsProblem(A.A, A.g, check_positive(delta, "delta"))
    if g is None:
        raise ValueError("g is required when A is not a TrsProblem")
    if delta is None:
        raise ValueError("delta (the trust-region radius) is required")
    op = A if isinstance(A, SymOperator) else as_operator(A)
    return TrsProblem(op, check_vector(g, "g", op.n), check_positive(delta, "delta"))
