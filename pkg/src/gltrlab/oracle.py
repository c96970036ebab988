"""Exact trust-region solutions from a full eigendecomposition.

Diagonal operators are handled directly in their own (coordinate) eigenbasis
at any order; dense operators are diagonalized first.  The secular equation
is then a sum of squares in the eigenbasis with an exact derivative.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .core import dense_eigh
from .exceptions import DenseTooLarge, NoConvergence, NotBoundaryCase
from .problem import DenseOperator, DiagonalOperator, TrsProblem
from .validation import check_problem

__all__ = [
    "Case",
    "ExactSolution",
    "classify_and_solve",
    "eigvec_of_M",
    "s_and_cond_of_lambda",
    "ExactTRS",
    "DENSE_MAX_ORDER",
]

DENSE_MAX_ORDER = 2000
JACOBI_MAX_ORDER = 200
HARD_CASE_RTOL = 1e-12
SECULAR_RTOL = 1e-12


class Case(str, enum.Enum):
    INTERIOR = "Interior"
    EASY_BOUNDARY = "EasyBoundary"
    HARD_CASE = "HardCase"


@dataclass(frozen=True)
class ExactSolution:
    """Oracle output.  ``evals``/``U``/``coeffs`` describe ``A`` in its eigenbasis
    (``U is None`` means the identity, i.e. a diagonal operator) and are kept so
    that powers of ``A + lambda_opt I`` can be applied exactly."""

    lambda_opt: float
    x_opt: np.ndarray
    case: Case
    alpha_1: float
    alpha_n: float
    kappa: float
    A_opt_norm: float
    evals: np.ndarray
    coeffs: np.ndarray
    U: np.ndarray | None = None

    @property
    def boundary(self) -> bool:
        return self.case is Case.EASY_BOUNDARY

    def _to_eig(self, v):
        return v if self.U is None else self.U.T @ v

    def _from_eig(self, w):
        return w if self.U is None else self.U @ w

    def apply_shifted_inverse(self, v, power: int = 1, shift: float | None = None):
        """``(A + shift I)^{-power} v`` with ``shift`` defaulting to ``lambda_opt``."""
        lam = self.lambda_opt if shift is None else shift
        return self._from_eig(self._to_eig(np.asarray(v, dtype=float)) / (self.evals + lam) ** power)

    def g_moment(self, power: int, shift: float | None = None) -> float:
        """``g^T (A + shift I)^{-power} g`` computed in the eigenbasis."""
        lam = self.lambda_opt if shift is None else shift
        return float(np.sum(self.coeffs**2 / (self.evals + lam) ** power))


def _spectrum(problem: TrsProblem):
    A = problem.A
    if isinstance(A, DiagonalOperator):
        return np.asarray(A.diag, dtype=float), None
    if problem.n > DENSE_MAX_ORDER:
        raise DenseTooLarge(f"dense oracle limited to n <= {DENSE_MAX_ORDER}, got {problem.n}")
    if isinstance(A, DenseOperator):
        M = A.matrix
    else:
        M = A.to_dense()
        M = 0.5 * (M + M.T)
    if problem.n <= JACOBI_MAX_ORDER:
        evals, U = dense_eigh(M)
    else:
        evals, U = np.linalg.eigh(M)
        evals, U = evals[::-1], U[:, ::-1]
    return np.asarray(evals, dtype=float), np.asarray(U, dtype=float)


def _secular_root(evals, c2, delta, lo, hi, max_iter=500):
    """Root of ``sum c2 / (evals + lam)^2 = delta^2`` on ``(lo, hi]``.

    Newton on ``1/||x(lam)|| - 1/delta`` from the left converges monotonically;
    bisection takes over whenever a step leaves the bracket.
    """

    def norm_and_slope(lam):
        s = evals + lam
        n2 = float(np.sum(c2 / s**2))
        d3 = float(np.sum(c2 / s**3))
        return math.sqrt(n2), n2, d3

    lam = lo if lo > 0 or np.all(evals + lo > 0) else 0.5 * (lo + hi)
    if np.any(evals + lam <= 0):
        lam = 0.5 * (lo + hi)
    for _ in range(max_iter):
        nrm, n2, d3 = norm_and_slope(lam)
        err = nrm - delta
        if abs(err) <= SECULAR_RTOL * delta:
            return lam
        if err > 0:
            lo = lam
        else:
            hi = lam
        new = lam + (err / delta) * n2 / d3
        if not lo < new <= hi:
            new = 0.5 * (lo + hi)
        if new == lam:
            return lam
        lam = new
    raise NoConvergence("oracle secular equation did not converge")


def classify_and_solve(problem: TrsProblem) -> ExactSolution:
    """Solve the trust-region subproblem exactly and classify its case."""
    evals, U = _spectrum(problem)
    coeffs = problem.g if U is None else U.T @ problem.g
    g_norm = problem.g_norm
    delta = problem.delta
    alpha_1 = float(np.max(evals))
    alpha_n = float(np.min(evals))
    scale = max(abs(alpha_1), abs(alpha_n), 1.0)

    def build(lam, case, y):
        x = y if U is None else U @ y
        denom = alpha_n + lam
        kappa = (alpha_1 + lam) / denom if denom > 0 else math.inf
        return ExactSolution(
            lambda_opt=float(lam),
            x_opt=np.asarray(x, dtype=float),
            case=case,
            alpha_1=alpha_1,
            alpha_n=alpha_n,
            kappa=float(kappa),
            A_opt_norm=float(alpha_1 + lam),
            evals=evals,
            coeffs=np.asarray(coeffs, dtype=float),
            U=U,
        )

    if alpha_n > 0:
        y = -coeffs / evals
        if np.linalg.norm(y) <= delta:
            return build(0.0, Case.INTERIOR, y)

    c2 = coeffs**2
    bottom = evals <= alpha_n + 1e-12 * scale
    lo = max(0.0, -alpha_n)
    if alpha_n <= 0 and np.sqrt(np.sum(c2[bottom])) <= HARD_CASE_RTOL * g_norm:
        rest = ~bottom
        y = np.zeros_like(coeffs)
        y[rest] = -coeffs[rest] / (evals[rest] - alpha_n)
        if np.linalg.norm(y) <= delta:
            return build(-alpha_n, Case.HARD_CASE, y)
        # the bottom components are numerically zero; drop them from the sum
        lam = _secular_root(evals[rest], c2[rest], delta, lo, lo + g_norm / delta)
        y = np.zeros_like(coeffs)
        y[rest] = -coeffs[rest] / (evals[rest] + lam)
        return build(lam, Case.EASY_BOUNDARY, y)

    lam = _secular_root(evals, c2, delta, lo, lo + g_norm / delta)
    return build(lam, Case.EASY_BOUNDARY, -coeffs / (evals + lam))


def _require_boundary(exact: ExactSolution):
    if exact.case is not Case.EASY_BOUNDARY:
        raise NotBoundaryCase(f"needs an easy boundary solution, got {exact.case.value}")


def eigvec_of_M(exact: ExactSolution, problem: TrsProblem):
    """Unit eigenvector ``(y1, y2)`` of ``M`` for its rightmost eigenvalue ``lambda_opt``.

    ``y1`` is parallel to ``x_opt`` and ``y2 = A_opt^{-1} y1``; the sign is
    chosen so that ``g^T y2 < 0``.  ``M`` itself is never formed.
    """
    _require_boundary(exact)
    y1 = np.array(exact.x_opt, dtype=float)
    y2 = exact.apply_shifted_inverse(y1)
    nrm = math.hypot(float(np.linalg.norm(y1)), float(np.linalg.norm(y2)))
    y1 /= nrm
    y2 /= nrm
    if problem.g @ y2 > 0:
        y1, y2 = -y1, -y2
    return y1, y2


def s_and_cond_of_lambda(exact: ExactSolution, problem: TrsProblem):
    """``s(lambda_opt) = ||A_opt^{-1} x_opt|| ||g|| / (g^T A_opt^{-3} g)`` and
    ``cond(lambda_opt) = 1 / (2 |y1^T y2|)``."""
    _require_boundary(exact)
    w = exact.apply_shifted_inverse(exact.x_opt)
    s_opt = float(np.linalg.norm(w)) * problem.g_norm / exact.g_moment(3)
    y1, y2 = eigvec_of_M(exact, problem)
    cond = 0.5 / abs(float(y1 @ y2))
    return s_opt, cond


class ExactTRS(BaseEstimator):
    """Estimator wrapper around :func:`classify_and_solve`.

    Attributes set by ``fit``: ``x_``, ``lambda_``, ``case_``, ``kappa_``,
    ``solution_`` and, for easy boundary problems, ``s_opt_`` and ``cond_opt_``.
    """

    def __init__(self, delta=None):
        self.delta = delta

    def fit(self, A, g=None):
        problem = check_problem(A, g, self.delta)
        sol = classify_and_solve(problem)
        self.problem_ = problem
        self.solution_ = sol
        self.x_ = sol.x_opt
        self.lambda_ = sol.lambda_opt
        self.case_ = sol.case.value
        self.kappa_ = sol.kappa
        if sol.boundary:
            self.s_opt_, self.cond_opt_ = s_and_cond_of_lambda(sol, problem)
        return self
