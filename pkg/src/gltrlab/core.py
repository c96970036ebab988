"""Dense and tridiagonal symmetric linear algebra primitives.

Everything here works on plain numpy arrays.  The tridiagonal kernels are
scalar recurrences written as Python loops over lists, which is the fastest
pure-Python form for the sizes GLTR produces (a few hundred to a few
thousand).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, eigvalsh_tridiagonal, lu_factor, lu_solve

from .exceptions import NoConvergence, NotPositiveDefinite, ZeroVector

__all__ = [
    "SymTridiagonal",
    "Rng",
    "ldl_tridiag",
    "tridiag_shift_solve",
    "tridiag_extreme_eigs",
    "tridiag_min_eig",
    "sturm_count",
    "dense_eigh",
    "sigma_min",
    "complement_basis",
    "householder_vector",
]

PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored by its diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float).reshape(-1)
        offdiag = np.array(self.offdiag, dtype=float).reshape(-1)
        if diag.size < 1:
            raise ValueError("a tridiagonal matrix needs at least one row")
        if offdiag.size != diag.size - 1:
            raise ValueError(
                f"offdiag has length {offdiag.size}, expected {diag.size - 1}"
            )
        diag.setflags(write=False)
        offdiag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def k(self) -> int:
        return self.diag.size

    @property
    def irreducible(self) -> bool:
        return bool(np.all(self.offdiag > 0))

    def leading(self, k: int) -> "SymTridiagonal":
        """Leading k-by-k principal submatrix."""
        return SymTridiagonal(self.diag[:k], self.offdiag[: k - 1])

    def to_dense(self) -> np.ndarray:
        T = np.diag(self.diag)
        if self.k > 1:
            idx = np.arange(self.k - 1)
            T[idx, idx + 1] = self.offdiag
            T[idx + 1, idx] = self.offdiag
        return T

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        if self.k > 1:
            out[:-1] += self.offdiag * v[1:]
            out[1:] += self.offdiag * v[:-1]
        return out

    def norm_estimate(self) -> float:
        """Cheap upper bound on the 2-norm (max absolute row sum)."""
        row = np.abs(self.diag).copy()
        if self.k > 1:
            row[:-1] += np.abs(self.offdiag)
            row[1:] += np.abs(self.offdiag)
        return float(row.max())


def ldl_tridiag(T: SymTridiagonal, shift: float = 0.0):
    """LDL^T factorization of ``T + shift*I`` without square roots.

    Returns the pivots ``d`` and the subdiagonal multipliers ``l`` as Python
    lists.  Raises :class:`NotPositiveDefinite` as soon as a pivot falls below
    ``1e-14`` times the scale of the shifted matrix.
    """
    delta = T.diag.tolist()
    beta = T.offdiag.tolist()
    scale = max(max(abs(a + shift) for a in delta), max((abs(b) for b in beta), default=0.0))
    tol = PIVOT_RTOL * scale
    d = [0.0] * len(delta)
    l = [0.0] * len(beta)
    p = delta[0] + shift
    if not p > tol:
        raise NotPositiveDefinite(0, p)
    d[0] = p
    for i, b in enumerate(beta):
        li = b / p
        l[i] = li
        p = delta[i + 1] + shift - li * b
        if not p > tol:
            raise NotPositiveDefinite(i + 1, p)
        d[i + 1] = p
    return d, l


def _ldl_apply_inverse(d, l, rhs):
    y = list(rhs)
    for i, li in enumerate(l):
        y[i + 1] -= li * y[i]
    for i in range(len(d)):
        y[i] /= d[i]
    for i in range(len(l) - 1, -1, -1):
        y[i] -= l[i] * y[i + 1]
    return y


def tridiag_shift_solve(T: SymTridiagonal, shift: float, rhs, power: int = 1) -> np.ndarray:
    """Return ``(T + shift*I)^{-power} @ rhs`` by repeated LDL^T solves."""
    if power < 1:
        raise ValueError("power must be a positive integer")
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    if rhs.size != T.k:
        raise ValueError(f"rhs has length {rhs.size}, expected {T.k}")
    d, l = ldl_tridiag(T, shift)
    y = rhs.tolist()
    for _ in range(power):
        y = _ldl_apply_inverse(d, l, y)
    return np.array(y)


def sturm_count(T: SymTridiagonal, x: float) -> int:
    """Number of eigenvalues of ``T`` strictly less than ``x``."""
    delta = T.diag.tolist()
    beta2 = (T.offdiag * T.offdiag).tolist()
    tiny = 1e-300 + np.finfo(float).eps * (max(abs(v) for v in delta) + abs(x))
    count = 0
    q = delta[0] - x
    if q == 0.0:
        q = -tiny
    if q < 0.0:
        count += 1
    for i, b2 in enumerate(beta2):
        q = delta[i + 1] - x - b2 / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def _stebz(T: SymTridiagonal, index: int) -> float:
    # LAPACK bisection on Sturm counts; tol=0 asks for full working accuracy
    w = eigvalsh_tridiagonal(
        T.diag, T.offdiag, select="i", select_range=(index, index), lapack_driver="stebz"
    )
    return float(w[0])


def tridiag_extreme_eigs(T: SymTridiagonal):
    """Smallest and largest eigenvalues of ``T`` by Sturm-sequence bisection."""
    if T.k == 1:
        v = float(T.diag[0])
        return v, v
    return _stebz(T, 0), _stebz(T, T.k - 1)


def tridiag_min_eig(T: SymTridiagonal) -> float:
    """Smallest eigenvalue of ``T`` by Sturm-sequence bisection."""
    if T.k == 1:
        return float(T.diag[0])
    return _stebz(T, 0)


def _round_robin(m):
    """Pairings for one parallel-ordered Jacobi sweep over ``m`` (even) indices."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append(
            (np.array(players[: m // 2]), np.array(players[m // 2 :][::-1]))
        )
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def dense_eigh(A, tol: float = 1e-13, max_sweeps: int = 64):
    """Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Rotations are applied in round-robin order, so each round annihilates
    ``n/2`` disjoint off-diagonal pairs with vectorized updates.  Returns the
    eigenvalues in descending order and the matching orthonormal eigenvectors
    as columns.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("dense_eigh expects a non-empty square matrix")
    n = A.shape[0]
    A = 0.5 * (A + A.T)
    m = n + (n % 2)
    if m != n:
        # pad with a decoupled dummy row so the round-robin schedule is even
        A = np.pad(A, ((0, 1), (0, 1)))
    V = np.eye(m)
    fro = np.linalg.norm(A)
    target = tol * fro
    rounds = _round_robin(m)
    for _sweep in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > 0.0
            if not active.any():
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            app, aqq = A[P, P], A[Q, Q]
            theta = (aqq - app) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            colp, colq = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = colp * c - colq * s
            A[:, Q] = colp * s + colq * c
            rowp, rowq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = rowp * c[:, None] - rowq * s[:, None]
            A[Q, :] = rowp * s[:, None] + rowq * c[:, None]
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vp, vq = V[:, P].copy(), V[:, Q].copy()
            V[:, P] = vp * c - vq * s
            V[:, Q] = vp * s + vq * c
    else:
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    evals = np.diag(A)[:n].copy()
    U = V[:n, :n].copy()
    order = np.argsort(evals)[::-1]
    return evals[order], U[:, order]


def sigma_min(B, rtol: float = 1e-12, max_iter: int = 500) -> float:
    """Smallest singular value by inverse power iteration on ``B^T B``.

    ``B`` is LU-factored once; each iteration costs two triangular solve
    pairs.  Returns 0.0 when ``B`` is singular to working precision.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("sigma_min expects a square matrix")
    m = B.shape[0]
    if m == 0:
        return 0.0
    scale = np.linalg.norm(B, 1)
    if scale == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(B, check_finite=False)
    if np.min(np.abs(np.diag(lu))) <= m * np.finfo(float).eps * scale:
        return 0.0
    x = np.cos(np.arange(1, m + 1))  # deterministic, not orthogonal to anything simple
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(max_iter):
        z = lu_solve((lu, piv), x, trans=1, check_finite=False)
        w = lu_solve((lu, piv), z, check_finite=False)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            return 0.0
        x = w / nw
        new = float(np.linalg.norm(B @ x))
        if abs(sigma - new) <= rtol * new:
            return new
        sigma = new
    # slow convergence means clustered small singular values; settle it exactly
    return float(np.linalg.svd(B, compute_uv=False)[-1])


def householder_vector(z):
    """Unit vector ``u`` such that ``(I - 2uu^T) e_1`` is parallel to ``z``."""
    z = np.asarray(z, dtype=float).reshape(-1)
    nz = np.linalg.norm(z)
    if nz == 0.0:
        raise ZeroVector("cannot build a reflector from the zero vector")
    z = z / nz
    v = z.copy()
    v[0] += 1.0 if z[0] >= 0.0 else -1.0
    return v / np.linalg.norm(v)


def complement_basis(z) -> np.ndarray:
    """Orthonormal basis (as columns) of the orthogonal complement of ``z``."""
    u = householder_vector(z)
    H = np.eye(u.size) - 2.0 * np.outer(u, u)
    return H[:, 1:]


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x.copy()
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


class Rng:
    """Counter-based SplitMix64 generator with Box-Muller normals.

    Output ``i`` is ``splitmix64(seed_state + (i+1) * 0x9E3779B97F4A7C15)``, so
    the stream depends only on the seed and is identical on every platform.
    Uniforms take the top 53 bits; normals come from the Box-Muller transform
    applied to consecutive uniform pairs.
    """

    def __init__(self, seed: int = 42, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        base = np.array([(self.seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
        if self.stream:
            base = _splitmix64(base ^ _splitmix64(np.array([self.stream], dtype=np.uint64)))
        self._state = base[0]
        self._counter = 0

    def spawn(self, index: int) -> "Rng":
        """Independent child stream ``index`` derived from this generator's seed."""
        return Rng(self.seed, stream=index + 1)

    def next_u64(self, size: int) -> np.ndarray:
        ctr = np.arange(self._counter + 1, self._counter + size + 1, dtype=np.uint64)
        self._counter += size
        with np.errstate(over="ignore"):
            return _splitmix64(self._state + ctr * _GOLDEN)

    def uniform(self, size: int) -> np.ndarray:
        """Uniform samples in [0, 1)."""
        return (self.next_u64(size) >> np.uint64(11)).astype(float) * 2.0**-53

    def normal(self, size: int) -> np.ndarray:
        pairs = (size + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps the log finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(2.0 * np.pi * u2)
        out[1::2] = r * np.sin(2.0 * np.pi * u2)
        return out[:size]
