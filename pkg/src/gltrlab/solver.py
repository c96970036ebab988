"""GLTR: the trust-region subproblem restricted to growing Krylov spaces.

At step k the Lanczos basis ``Q_k`` reduces the problem to a k-dimensional
tridiagonal subproblem, which is solved from scratch by a safeguarded Newton
iteration on the secular equation.  The residual of the full problem is
available for free as ``beta_k * |e_k^T h_k|``.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning

from .core import SymTridiagonal, _ldl_apply_inverse, ldl_tridiag, tridiag_min_eig
from .exceptions import MaxSecularIterations, NotConverged, NotPositiveDefinite
from .lanczos import LanczosFactorization, lanczos_extend, lanczos_init
from .validation import check_problem

__all__ = [
    "ReducedSolution",
    "IterationRecord",
    "GltrResult",
    "solve_reduced_trs",
    "gltr_solve",
    "evaluate_f",
    "GLTR",
]


@dataclass(frozen=True)
class ReducedSolution:
    h: np.ndarray
    lam: float
    boundary: bool
    iterations: int = 0


@dataclass(frozen=True)
class IterationRecord:
    k: int
    lambda_k: float
    x_norm: float
    residual_norm: float
    f_value: float
    beta_k: float
    boundary: bool
    wall_time: float
    residual_explicit: float | None = None


@dataclass
class GltrResult:
    x: np.ndarray
    lam: float
    trace: list = field(default_factory=list)
    converged: bool = False
    k_final: int = 0
    h: np.ndarray | None = None
    factorization: LanczosFactorization | None = None
    reason: str = ""

    @property
    def lambdas(self):
        return np.array([r.lambda_k for r in self.trace])

    @property
    def residuals(self):
        return np.array([r.residual_norm for r in self.trace])


def _solve_at(d, l, g_norm):
    rhs = [0.0] * len(d)
    rhs[0] = -g_norm
    return _ldl_apply_inverse(d, l, rhs)


def _norm(v):
    return float(np.sqrt(np.dot(v, v)))


def _near_hard_case(T, g_norm, delta, lam, it):
    # The bracket has collapsed onto -theta_min while ||h|| < delta: move
    # along the bottom eigenvector of T to reach the boundary.
    try:
        d, l = ldl_tridiag(T, lam)
        h = np.array(_solve_at(d, l, g_norm))
    except NotPositiveDefinite:
        h = np.zeros(T.k)
    if T.k == 1:
        z = np.ones(1)
    else:
        _, z = eigh_tridiagonal(T.diag, T.offdiag, select="i", select_range=(0, 0))
        z = z[:, 0]
    hz = float(h @ z)
    gap = max(delta**2 - float(h @ h), 0.0)
    # of the two roots, the one with tau * z^T h > 0 has the lower model value
    tau = -hz + math.copysign(math.sqrt(hz * hz + gap), hz)
    return ReducedSolution(h + tau * z, float(lam), True, it)


def solve_reduced_trs(
    T: SymTridiagonal,
    g_norm: float,
    delta: float,
    lam_init: float | None = None,
    rtol: float = 1e-10,
    max_iter: int = 200,
) -> ReducedSolution:
    """Solve ``min 0.5 h^T T h + g_norm * h_1`` subject to ``||h|| <= delta``.

    Newton's method is applied to ``1/||h(lam)|| - 1/delta`` where
    ``(T + lam I) h(lam) = -g_norm e_1``.  That function is concave and
    increasing on ``(-theta_min, inf)``, so Newton started left of the root
    climbs to it monotonically; ``theta_min`` comes from Sturm bisection.
    ``lam_init`` (a known lower bound on the multiplier, e.g. the previous
    GLTR multiplier) warm-starts the iteration.  When ``h`` at ``-theta_min``
    is already inside the ball, the bottom eigenvector of ``T`` supplies the
    missing length.
    """
    if g_norm <= 0 or delta <= 0:
        raise ValueError("g_norm and delta must be positive")
    try:
        d, l = ldl_tridiag(T, 0.0)
        h = _solve_at(d, l, g_norm)
        if _norm(h) <= delta:
            return ReducedSolution(np.array(h), 0.0, abs(_norm(h) - delta) <= rtol * delta)
    except NotPositiveDefinite:
        pass
    theta = tridiag_min_eig(T)
    lo = max(0.0, -theta)
    hi = lo + g_norm / delta
    # a start within 1e-12 of -theta_min is close enough to call the hard case
    near = 1e-12 * max(1.0, abs(lo))
    lam = lo + near if theta < 0 else lo
    if lam_init is not None and lam < lam_init < hi:
        lam = lam_init

    tiny = near
    for it in range(1, max_iter + 1):
        try:
            d, l = ldl_tridiag(T, lam)
        except NotPositiveDefinite:
            # rounding put lam on or just left of -theta_min
            lam = max(lam, lo) + tiny
            tiny *= 2
            if lam - lo > 1e-10 * max(1.0, abs(lo)):
                raise MaxSecularIterations(f"cannot factor T + lam I near lam = {lo}")
            continue
        h = _solve_at(d, l, g_norm)
        hn = _norm(h)
        err = hn - delta
        if abs(err) <= rtol * delta:
            return ReducedSolution(np.array(h), float(lam), True, it)
        if err < 0:
            if lam - lo <= 1e-10 * max(1.0, abs(lo)) or lo == 0.0 and lam == 0.0:
                return _near_hard_case(T, g_norm, delta, lam, it)
            # overshoot can only come from rounding; step back toward lo
            hi = lam
            lam = 0.5 * (lo + hi)
            continue
        lo = lam
        w = _ldl_apply_inverse(d, l, h)
        new = lam + (err / delta) * hn * hn / float(np.dot(h, w))
        if new <= lam:
            # No further progress in floating point: neighbouring lam values
            # straddle the root.  Take the inner one and top up along the
            # bottom eigenvector.
            up = lam
            for _ in range(64):
                up = np.nextafter(up, np.inf)
                d, l = ldl_tridiag(T, up)
                if _norm(_solve_at(d, l, g_norm)) <= delta:
                    break
            return _near_hard_case(T, g_norm, delta, float(up), it)
        if new > hi:
            new = 0.5 * (lam + hi)
        lam = new
    raise MaxSecularIterations(
        f"secular equation not solved in {max_iter} iterations (bracket [{lo}, {hi}])"
    )


def evaluate_f(problem, x) -> float:
    """Quadratic model value ``0.5 x^T A x + g^T x``."""
    return problem.objective(x)


def _reduced_f(T: SymTridiagonal, h, g_norm):
    return float(0.5 * h @ T.matvec(h) + g_norm * h[0])


def gltr_solve(
    problem,
    tol_resid: float = 1e-10,
    k_max_cap: int | None = None,
    reorth: bool = True,
    strict: bool = False,
    explicit_residual: bool = False,
) -> GltrResult:
    """Run GLTR until the residual, a Lanczos breakdown, or the step cap stops it.

    Stops when ``beta_k |e_k^T h_k| <= tol_resid * ||g||``.  With
    ``strict=True`` hitting ``k_max_cap`` raises :class:`NotConverged`
    carrying the partial result; otherwise ``result.converged`` is False.
    ``explicit_residual`` additionally records ``||(A + lam_k I) x_k + g||``
    formed from ``x_k = Q_k h_k`` (costs O(nk) per step).
    """
    cap = problem.n if k_max_cap is None else min(int(k_max_cap), problem.n)
    if cap < 1:
        raise ValueError("k_max_cap must be at least 1")
    g_norm = problem.g_norm
    start = time.perf_counter()
    state = lanczos_init(problem, reorth=reorth)
    trace = []
    lam_prev = None
    converged = False
    reason = "cap"
    while True:
        T = state.T
        sol = solve_reduced_trs(T, g_norm, problem.delta, lam_init=lam_prev)
        beta = state.beta_k
        resid = float(beta * abs(sol.h[-1]))
        explicit = None
        if explicit_residual:
            x = state.Q @ sol.h
            explicit = float(np.linalg.norm(problem.A.matvec(x) + sol.lam * x + problem.g))
        trace.append(
            IterationRecord(
                k=state.k,
                lambda_k=sol.lam,
                x_norm=_norm(sol.h),
                residual_norm=resid,
                f_value=_reduced_f(T, sol.h, g_norm),
                beta_k=beta,
                boundary=sol.boundary,
                wall_time=time.perf_counter() - start,
                residual_explicit=explicit,
            )
        )
        lam_prev = sol.lam if sol.lam > 0 else None
        if resid <= tol_resid * g_norm:
            converged, reason = True, "residual"
            break
        if state.broke_down:
            converged, reason = True, "breakdown"
            break
        if state.k >= cap:
            break
        lanczos_extend(state, problem)
    result = GltrResult(
        x=state.Q @ sol.h,
        lam=sol.lam,
        trace=trace,
        converged=converged,
        k_final=state.k,
        h=sol.h,
        factorization=state.snapshot(),
        reason=reason,
    )
    if strict and not converged:
        raise NotConverged(f"GLTR stopped at the cap k={state.k} before converging", result)
    return result


class GLTR(BaseEstimator):
    """Estimator-style wrapper around :func:`gltr_solve`.

    Parameters
    ----------
    delta : float, optional
        Trust-region radius.  Required unless ``fit`` receives a
        :class:`~gltrlab.problem.TrsProblem`.
    tol : float
        Residual tolerance relative to ``||g||``.
    max_iter : int, optional
        Cap on Lanczos steps (defaults to the problem order).
    reorth : bool
        Full two-pass reorthogonalization of the Lanczos basis.

    Attributes
    ----------
    x_, lambda_ : solution estimate and its multiplier
    n_iter_ : number of Lanczos steps taken
    converged_ : whether the residual test or a breakdown stopped the run
    trace_ : list of :class:`IterationRecord`
    result_ : the full :class:`GltrResult`
    """

    def __init__(self, delta=None, tol=1e-10, max_iter=None, reorth=True):
        self.delta = delta
        self.tol = tol
        self.max_iter = max_iter
        self.reorth = reorth

    def fit(self, A, g=None):
        problem = check_problem(A, g, self.delta)
        result = gltr_solve(problem, tol_resid=self.tol, k_max_cap=self.max_iter, reorth=self.reorth)
        if not result.converged:
            warnings.warn(
                f"GLTR reached max_iter={self.max_iter} with residual "
                f"{result.trace[-1].residual_norm:.3e}",
                ConvergenceWarning,
            )
        self.problem_ = problem
        self.result_ = result
        self.x_ = result.x
        self.lambda_ = result.lam
        self.n_iter_ = result.k_final
        self.converged_ = result.converged
        self.trace_ = result.trace
        self.objective_ = result.trace[-1].f_value
        return self
