"""Trust-region subproblems: operators, problem container, generators and file I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import Rng
from .exceptions import (
    AsymmetricMatrix,
    DimensionMismatch,
    InvalidInterval,
    ParseError,
    ZeroGradient,
)

__all__ = [
    "SymOperator",
    "DenseOperator",
    "DiagonalOperator",
    "CallbackOperator",
    "as_operator",
    "TrsProblem",
    "gen_chebyshev_diag",
    "gen_example1",
    "gen_example2",
    "gen_random_dense",
    "load_problem",
    "save_problem",
    "read_matrix_market",
]

SYMMETRY_RTOL = 1e-10


class SymOperator:
    """Symmetric linear operator ``v -> A v`` of order ``n``."""

    n: int

    def matvec(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __matmul__(self, v):
        return self.matvec(v)

    def to_dense(self) -> np.ndarray:
        return np.column_stack([self.matvec(e) for e in np.eye(self.n)])

    def norm_estimate(self, iters: int = 50) -> float:
        v = np.cos(np.arange(1, self.n + 1, dtype=float))
        v /= np.linalg.norm(v)
        est = 0.0
        for _ in range(iters):
            w = self.matvec(v)
            est = float(np.linalg.norm(w))
            if est == 0.0:
                break
            v = w / est
        return est


class DenseOperator(SymOperator):
    def __init__(self, matrix):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"dense operator must be square, got shape {M.shape}")
        scale = max(np.abs(M).max(), 1.0) if M.size else 1.0
        if np.abs(M - M.T).max(initial=0.0) > SYMMETRY_RTOL * scale:
            raise AsymmetricMatrix("matrix is not symmetric")
        M = 0.5 * (M + M.T)
        M.setflags(write=False)
        self.matrix = M
        self.n = M.shape[0]

    def matvec(self, v):
        return self.matrix @ v

    def to_dense(self):
        return np.array(self.matrix)

    def norm_estimate(self, iters: int = 50) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def __repr__(self):
        return f"DenseOperator(n={self.n})"


class DiagonalOperator(SymOperator):
    def __init__(self, diag):
        d = np.array(diag, dtype=float).reshape(-1)
        d.setflags(write=False)
        self.diag = d
        self.n = d.size

    def matvec(self, v):
        return self.diag * v if np.ndim(v) == 1 else self.diag[:, None] * v

    def to_dense(self):
        return np.diag(self.diag)

    def norm_estimate(self, iters: int = 50) -> float:
        return float(np.abs(self.diag).max())

    def __repr__(self):
        return f"DiagonalOperator(n={self.n})"


class CallbackOperator(SymOperator):
    """Matrix-free operator; symmetry is the caller's responsibility."""

    def __init__(self, apply: Callable[[np.ndarray], np.ndarray], n: int):
        self.apply = apply
        self.n = int(n)

    def matvec(self, v):
        return np.asarray(self.apply(v), dtype=float)

    def __repr__(self):
        return f"CallbackOperator(n={self.n})"


def as_operator(A) -> SymOperator:
    """Wrap an array, a 1-d diagonal, or an existing operator."""
    if isinstance(A, SymOperator):
        return A
    if callable(A) and not isinstance(A, np.ndarray):
        raise TypeError("wrap callables explicitly with CallbackOperator(apply, n)")
    arr = np.asarray(A, dtype=float)
    if arr.ndim == 1:
        return DiagonalOperator(arr)
    return DenseOperator(arr)


@dataclass(frozen=True)
class TrsProblem:
    """min 0.5 x^T A x + g^T x  subject to  ||x|| <= delta."""

    A: SymOperator
    g: np.ndarray
    delta: float

    def __post_init__(self):
        A = as_operator(self.A)
        g = np.array(self.g, dtype=float).reshape(-1)
        if g.size != A.n:
            raise DimensionMismatch(f"g has length {g.size}, operator has order {A.n}")
        if not np.all(np.isfinite(g)):
            raise ValueError("g contains non-finite entries")
        if not np.linalg.norm(g) > 0.0:
            raise ZeroGradient("g must be nonzero")
        delta = float(self.delta)
        if not delta > 0.0 or not math.isfinite(delta):
            raise ValueError(f"delta must be positive and finite, got {self.delta}")
        g.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def g_norm(self) -> float:
        return float(np.linalg.norm(self.g))

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.A.matvec(x) + self.g @ x)


def gen_chebyshev_diag(a: float, b: float, n: int) -> np.ndarray:
    """Chebyshev zeros of degree ``n`` translated to ``[a, b]``, in decreasing order."""
    if not a < b:
        raise InvalidInterval(f"need a < b, got [{a}, {b}]")
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(1, n + 1)
    nodes = np.cos((2 * j - 1) * np.pi / (2 * n))
    return 0.5 * (b - a) * (nodes + (a + b) / (b - a))


def gen_example1(a: float, b: float, n: int, delta: float, seed: int = 42) -> TrsProblem:
    """Diagonal Chebyshev-node problem with a unit-norm Gaussian gradient."""
    diag = gen_chebyshev_diag(a, b, n)
    g = Rng(seed).normal(n)
    g /= np.linalg.norm(g)
    return TrsProblem(DiagonalOperator(diag), g, delta)


EXAMPLE2_SHIFT = 500.0


def gen_example2(rho: float, n: int = 10000) -> TrsProblem:
    """Deterministic problem with known multiplier 500.

    The base matrix is ``diag(nodes on [1, 3000], 0.1)`` of order ``n + 1``;
    the operator is that minus ``500 I``.  With ``f = (rho, ..., rho, 1)`` the
    solution is ``x = base @ f``, the radius is ``||base @ f||`` and the
    gradient is ``g = -base^2 @ f`` so that ``(A + 500 I) x = -g``.
    """
    base = np.append(gen_chebyshev_diag(1.0, 3000.0, n), 0.1)
    f = np.full(n + 1, float(rho))
    f[-1] = 1.0
    bf = base * f
    return TrsProblem(DiagonalOperator(base - EXAMPLE2_SHIFT), -base * bf, float(np.linalg.norm(bf)))


def gen_random_dense(n: int, rng: Rng, kind: str = "boundary") -> TrsProblem:
    """Random dense problem used by the validation suites.

    ``kind`` is one of ``"interior"`` (SPD matrix, large radius), ``"boundary"``
    (indefinite matrix) or ``"near_hard"`` (gradient almost orthogonal to the
    bottom eigenvector).
    """
    G = rng.normal(n * n).reshape(n, n)
    Qm, _ = np.linalg.qr(G)
    evals = np.sort(rng.normal(n) * 3.0)[::-1]
    g = rng.normal(n)
    if kind == "interior":
        evals = np.abs(evals) + 0.5
        delta = 1.0 + 2.0 * float(np.linalg.norm(g / evals))
    elif kind == "boundary":
        delta = 0.2 + 2.0 * float(rng.uniform(1)[0])
    elif kind == "near_hard":
        coeffs = g.copy()
        coeffs[-1] = 1e-4 * float(np.linalg.norm(g))
        g = coeffs
        delta = 0.2 + 2.0 * float(rng.uniform(1)[0])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    A = (Qm * evals) @ Qm.T
    return TrsProblem(DenseOperator(0.5 * (A + A.T)), Qm @ g, delta)


def _content_lines(lines, first_line_no):
    """Yield (line_no, stripped line) for non-comment, non-blank lines."""
    for no, line in enumerate(lines, start=first_line_no):
        s = line.strip()
        if s and not s.startswith("%"):
            yield no, s


def _float(tok, line, pos):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a real number, got {tok!r}", line, pos) from None


def read_matrix_market(path) -> np.ndarray:
    """Read a real Matrix Market file (coordinate or array, general or symmetric)."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise ParseError("missing %%MatrixMarket header", 1, 1)
    header = lines[0].lower().split()
    if len(header) < 5 or header[1] != "matrix":
        raise ParseError("malformed header", 1, 1)
    layout, field, symmetry = header[2], header[3], header[4]
    if field not in ("real", "integer", "double"):
        raise ParseError(f"unsupported field {field!r}", 1, None)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1, None)
    body = list(_content_lines(lines[1:], 2))
    if not body:
        raise ParseError("missing size line", 2, None)
    size_no, size_line = body[0]
    parts = size_line.split()
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"bad size line {size_line!r}", size_no, 1) from None
    entries = body[1:]
    if layout == "coordinate":
        if len(dims) != 3:
            raise ParseError("coordinate size line needs rows cols nnz", size_no, 1)
        rows, cols, nnz = dims
        M = np.zeros((rows, cols))
        if len(entries) != nnz:
            raise ParseError(f"expected {nnz} entries, found {len(entries)}", size_no, None)
        for no, s in entries:
            f = s.split()
            if len(f) != 3:
                raise ParseError("coordinate entry needs 'row col value'", no, 1)
            try:
                i, j = int(f[0]) - 1, int(f[1]) - 1
            except ValueError:
                raise ParseError(f"bad index in {s!r}", no, 1) from None
            if not (0 <= i < rows and 0 <= j < cols):
                raise ParseError(f"index ({i + 1}, {j + 1}) out of range", no, 1)
            v = _float(f[2], no, len(f[0]) + len(f[1]) + 3)
            M[i, j] = v
            if symmetry == "symmetric":
                if j > i:
                    raise ParseError("symmetric files store the lower triangle only", no, 1)
                M[j, i] = v
        return M
    if layout == "array":
        if len(dims) != 2:
            raise ParseError("array size line needs rows cols", size_no, 1)
        rows, cols = dims
        vals = [_float(s.split()[0], no, 1) for no, s in entries]
        if symmetry == "symmetric":
            expect = rows * (rows + 1) // 2
            if rows != cols or len(vals) != expect:
                raise ParseError(f"expected {expect} values", size_no, None)
            M = np.zeros((rows, rows))
            it = iter(vals)
            for j in range(rows):
                for i in range(j, rows):
                    M[i, j] = M[j, i] = next(it)
            return M
        if len(vals) != rows * cols:
            raise ParseError(f"expected {rows * cols} values, found {len(vals)}", size_no, None)
        return np.array(vals).reshape(cols, rows).T
    raise ParseError(f"unsupported layout {layout!r}", 1, None)


def _load_diag_json(path) -> TrsProblem:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    missing = {"diag", "g", "delta"} - set(data)
    if missing:
        raise ParseError(f"diag-json is missing keys {sorted(missing)}")
    diag = np.asarray(data["diag"], dtype=float)
    g = np.asarray(data["g"], dtype=float)
    if diag.ndim != 1 or g.ndim != 1:
        raise ParseError("'diag' and 'g' must be flat lists of numbers")
    if diag.size != g.size:
        raise DimensionMismatch(f"g has length {g.size}, diag has length {diag.size}")
    return TrsProblem(DiagonalOperator(diag), g, float(data["delta"]))


def load_problem(path, fmt: str = "diag-json", g=None, delta=None) -> TrsProblem:
    """Load a problem from ``diag-json`` or ``matrix-market``.

    A Matrix Market file only carries the matrix; the gradient comes from
    ``g`` (an array or the path of a Matrix Market array file) and the radius
    from ``delta``.
    """
    if fmt == "diag-json":
        return _load_diag_json(path)
    if fmt != "matrix-market":
        raise ValueError(f"unknown format {fmt!r}")
    M = read_matrix_market(path)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix is {M.shape[0]}x{M.shape[1]}, not square")
    if g is None or delta is None:
        raise ValueError("matrix-market problems need a gradient and a radius")
    if isinstance(g, (str, Path)):
        g = read_matrix_market(g).reshape(-1)
    g = np.asarray(g, dtype=float).reshape(-1)
    if g.size != M.shape[0]:
        raise DimensionMismatch(f"g has length {g.size}, matrix has order {M.shape[0]}")
    return TrsProblem(DenseOperator(M), g, delta)


def save_problem(problem: TrsProblem, path) -> None:
    """Write a diagonal problem as diag-json (repr-exact floats)."""
    if not isinstance(problem.A, DiagonalOperator):
        raise TypeError("only diagonal problems can be saved as diag-json")
    payload = {
        "diag": problem.A.diag.tolist(),
        "g": problem.g.tolist(),
        "delta": problem.delta,
    }
    Path(path).write_text(json.dumps(payload))
