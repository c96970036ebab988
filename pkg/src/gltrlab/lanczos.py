"""Symmetric Lanczos process for the Krylov space K_k(A, g)."""
from __future__ import annotations

import numpy as np

from .core import SymTridiagonal
from .exceptions import AlreadyBrokenDown, ZeroGradient

__all__ = ["LanczosFactorization", "lanczos_init", "lanczos_extend"]

BREAKDOWN_RTOL = 1e-13


class LanczosFactorization:
    """k-step Lanczos state ``A Q_k = Q_k T_k + beta_k q_{k+1} e_k^T``.

    ``Q`` is stored explicitly (n x k, Fortran order so column blocks are
    contiguous) because the bound computations need it.  The object is grown
    in place by :func:`lanczos_extend`; use :meth:`snapshot` to hand out a
    frozen copy.
    """

    def __init__(self, n, g_norm, reorth=True):
        self.n = n
        self.g_norm = g_norm
        self.reorth = reorth
        self.k = 0
        self._Q = np.zeros((n, 8), order="F")
        self._delta = []
        self._beta = []  # beta_1 .. beta_k; the last one couples to next_q
        self.next_q = None
        self.broke_down = False
        self._tnorm = 0.0

    @property
    def Q(self) -> np.ndarray:
        return self._Q[:, : self.k]

    @property
    def T(self) -> SymTridiagonal:
        return SymTridiagonal(self._delta, self._beta[: self.k - 1])

    @property
    def beta_k(self) -> float:
        return self._beta[self.k - 1]

    @property
    def deltas(self):
        return np.array(self._delta)

    @property
    def betas(self):
        return np.array(self._beta)

    def breakdown_tol(self) -> float:
        return BREAKDOWN_RTOL * (self._tnorm + 1.0)

    def _append_column(self, q):
        if self.k == self._Q.shape[1]:
            grown = np.zeros((self.n, 2 * self._Q.shape[1]), order="F")
            grown[:, : self.k] = self._Q[:, : self.k]
            self._Q = grown
        self._Q[:, self.k] = q
        self.k += 1

    def snapshot(self) -> "LanczosFactorization":
        other = LanczosFactorization(self.n, self.g_norm, self.reorth)
        other._Q = np.array(self._Q[:, : self.k], order="F")
        other._Q.setflags(write=False)
        other.k = self.k
        other._delta = list(self._delta)
        other._beta = list(self._beta)
        other.next_q = None if self.next_q is None else self.next_q.copy()
        other.broke_down = self.broke_down
        other._tnorm = self._tnorm
        return other

    def __repr__(self):
        return f"LanczosFactorization(n={self.n}, k={self.k}, broke_down={self.broke_down})"


def _step(state: LanczosFactorization, A, q):
    """Append ``q`` as the next basis vector and compute its coefficients."""
    k = state.k
    state._append_column(q)
    w = A.matvec(q)
    delta = float(q @ w)
    w = w - delta * q
    if k > 0:
        w -= state._beta[k - 1] * state._Q[:, k - 1]
    if state.reorth:
        Q = state._Q[:, : k + 1]
        for _ in range(2):
            coeffs = Q.T @ w
            w -= Q @ coeffs
            delta += coeffs[k]
    beta = float(np.linalg.norm(w))
    state._delta.append(delta)
    state._tnorm = max(state._tnorm, abs(delta) + beta + (state._beta[k - 1] if k else 0.0))
    if beta <= state.breakdown_tol() or state.k >= state.n:
        # invariant subspace reached: the coupling to q_{k+1} is exactly zero
        state._beta.append(0.0)
        state.broke_down = True
        state.next_q = None
    else:
        state._beta.append(beta)
        state.next_q = w / beta
    return state


def lanczos_init(problem, reorth: bool = True) -> LanczosFactorization:
    """First Lanczos step: ``q_1 = g/||g||``, ``delta_1``, ``beta_1`` and ``q_2``."""
    g_norm = float(np.linalg.norm(problem.g))
    if g_norm == 0.0:
        raise ZeroGradient("Lanczos needs a nonzero starting vector")
    state = LanczosFactorization(problem.n, g_norm, reorth=reorth)
    return _step(state, problem.A, problem.g / g_norm)


def lanczos_extend(state: LanczosFactorization, problem) -> LanczosFactorization:
    """Advance the factorization by one step (in place) and return it."""
    if state.broke_down:
        raise AlreadyBrokenDown(f"Lanczos broke down at k={state.k}")
    return _step(state, problem.A, state.next_q)
