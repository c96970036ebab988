"""A-priori error bounds for GLTR, evaluated against the exact solution.

Everything here is a post-pass: :func:`trace_bounds` takes a finished
:class:`~gltrlab.solver.GltrResult` (whose factorization snapshot holds
``Q_k`` and ``T_k``) together with the oracle's
:class:`~gltrlab.oracle.ExactSolution` and produces one :class:`BoundRow`
per iteration.  Bounds that assume ``||x_k|| = ||x_opt|| = Delta`` are
``None`` on interior iterations.

Naming follows the CSV schema: ``*_actual`` is the measured error, ``*_old_*``
and ``*_jia_*``/``*_gould_*`` are the earlier bounds, ``*_new_*`` the sharper
ones.  Asymptotic bounds (``resid_jia_1027``, ``lamgap_jia_1115``) and the
first-order diagnostic ``lamgap_jia_1503`` come with no validity guarantee.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .chebyshev import convergence_factor
from .core import SymTridiagonal, householder_vector, sigma_min, tridiag_extreme_eigs, tridiag_shift_solve
from .exceptions import NotBoundaryCase
from .oracle import Case, ExactSolution, eigvec_of_M, s_and_cond_of_lambda

__all__ = [
    "BoundRow",
    "ShadowIterate",
    "BoundContext",
    "BOUND_COLUMNS",
    "eps_k",
    "fgap_dist_bounds",
    "residual_bounds",
    "angle_bounds",
    "lambda_bounds",
    "shadow_gap",
    "shadow_iterate",
    "norm_of_M",
    "projected_M",
    "ritz_vector_of_Mk",
    "trace_bounds",
]

SEP_TOL = 1e-12
VALIDITY_PAIRS = (
    # (actual, bound) pairs covered by the non-asymptotic theorems
    ("eps_k_exact", "eps_k_bound"),
    ("fgap_actual", "fgap_new_318"),
    ("fgap_actual", "fgap_new_1052"),
    ("dist_actual", "dist_new_1019"),
    ("dist_actual", "dist_new_1053"),
    ("resid_actual", "resid_new_411"),
    ("resid_actual", "resid_new_450"),
    ("resid_actual", "resid_new_1215"),
    ("resid_actual", "resid_min_1057"),
    ("angle_actual", "angle_new_1518"),
    ("angle_actual", "angle_new_16_06"),
    ("lamgap_actual", "lamgap_new_eq144"),
    ("lamgap_actual", "lamgap_new_eq1434"),
    ("lamgap_actual", "lamgap_new_826"),
    ("shadow_gap", "shadow_gap_bound"),
    ("shadow_resid", "shadow_resid_bound"),
)


@dataclass
class BoundRow:
    k: int
    boundary: bool
    lambda_k: float
    beta_k: float
    eps_k_exact: float | None = None
    eps_k_bound: float | None = None
    fgap_actual: float | None = None
    fgap_old_Thm31: float | None = None
    fgap_new_318: float | None = None
    fgap_new_1052: float | None = None
    dist_actual: float | None = None
    dist_old_1055: float | None = None
    dist_new_1019: float | None = None
    dist_new_1053: float | None = None
    resid_actual: float | None = None
    resid_jia_1027: float | None = None
    resid_gould_1028: float | None = None
    resid_new_411: float | None = None
    resid_new_450: float | None = None
    resid_new_1215: float | None = None
    resid_min_1057: float | None = None
    angle_actual: float | None = None
    angle_jia_11_23: float | None = None
    angle_new_1518: float | None = None
    angle_new_16_06: float | None = None
    lamgap_actual: float | None = None
    lamgap_jia_1115: float | None = None
    lamgap_jia_1503: float | None = None
    lamgap_new_eq144: float | None = None
    lamgap_new_eq1434: float | None = None
    lamgap_new_826: float | None = None
    shadow_gap: float | None = None
    shadow_gap_bound: float | None = None
    shadow_resid: float | None = None
    shadow_resid_bound: float | None = None
    s_k: float | None = None
    sin_y_Sk: float | None = None
    sin_y2_K: float | None = None
    sep_k: float | None = None
    c_k: float | None = None
    kappa_k: float | None = None
    kappa_tilde_k: float | None = None

    @property
    def applicable(self) -> dict:
        """Which bound columns carry a number for this row."""
        return {f.name: getattr(self, f.name) is not None for f in fields(self)}

    def as_dict(self) -> dict:
        return asdict(self)

    def violations(self, rtol: float = 1e-8):
        """Non-asymptotic (actual, bound) pairs with ``actual > bound + rtol*(1+bound)``."""
        out = []
        for a, b in VALIDITY_PAIRS:
            va, vb = getattr(self, a), getattr(self, b)
            if va is None or vb is None:
                continue
            if va > vb + rtol * (1.0 + vb):
                out.append((a, b, va, vb))
        return out


BOUND_COLUMNS = tuple(f.name for f in fields(BoundRow))


@dataclass(frozen=True)
class ShadowIterate:
    h_tilde: np.ndarray
    x_tilde: np.ndarray | None
    r_tilde_norm: float


@dataclass
class BoundContext:
    """Problem-level constants shared by every iteration."""

    problem: object
    exact: ExactSolution
    delta: float
    g_norm: float
    kappa: float
    t: float
    A_opt_norm: float
    spread: float
    y1: np.ndarray
    y2: np.ndarray
    y1_norm: float
    y2_norm: float
    w_norm: float  # ||A_opt^{-1} x_opt||
    s_opt: float
    cond_opt: float
    M_norm: float | None = None

    @classmethod
    def build(cls, problem, exact: ExactSolution, with_M_norm: bool = True):
        if exact.case is not Case.EASY_BOUNDARY:
            raise NotBoundaryCase(f"bounds need an easy boundary problem, got {exact.case.value}")
        y1, y2 = eigvec_of_M(exact, problem)
        s_opt, cond_opt = s_and_cond_of_lambda(exact, problem)
        w = exact.apply_shifted_inverse(exact.x_opt)
        ctx = cls(
            problem=problem,
            exact=exact,
            delta=problem.delta,
            g_norm=problem.g_norm,
            kappa=exact.kappa,
            t=convergence_factor(exact.kappa),
            A_opt_norm=exact.A_opt_norm,
            spread=exact.alpha_1 - exact.alpha_n,
            y1=y1,
            y2=y2,
            y1_norm=float(np.linalg.norm(y1)),
            y2_norm=float(np.linalg.norm(y2)),
            w_norm=float(np.linalg.norm(w)),
            s_opt=s_opt,
            cond_opt=cond_opt,
        )
        if with_M_norm:
            ctx.M_norm = norm_of_M(problem)
        return ctx


def norm_of_M(problem, tol: float = 1e-6, max_iter: int = 500) -> float:
    """``||M||_2`` for ``M = [[-A, g g^T / Delta^2], [I, -A]]`` by power
    iteration on ``M^T M``, applied block-wise."""
    A, g, d2 = problem.A, problem.g, problem.delta**2
    n = problem.n

    def M(a, b):
        return -A.matvec(a) + g * (g @ b) / d2, a - A.matvec(b)

    def MT(u, v):
        return -A.matvec(u) + v, g * (g @ u) / d2 - A.matvec(v)

    a = np.cos(np.arange(1, n + 1, dtype=float))
    b = np.sin(np.arange(1, n + 1, dtype=float))
    nrm = math.sqrt(a @ a + b @ b)
    a, b = a / nrm, b / nrm
    est = 0.0
    for _ in range(max_iter):
        u, v = M(a, b)
        a, b = MT(u, v)
        lam = math.sqrt(a @ a + b @ b)
        if lam == 0.0:
            return 0.0
        a, b = a / lam, b / lam
        new = math.sqrt(lam)
        if abs(new - est) <= tol * new:
            return new
        est = new
    return est


def projected_M(T: SymTridiagonal, g_norm: float, delta: float) -> np.ndarray:
    """Dense ``M_k = [[-T_k, (||g||^2/Delta^2) e_1 e_1^T], [I, -T_k]]``."""
    k = T.k
    Td = T.to_dense()
    Mk = np.zeros((2 * k, 2 * k))
    Mk[:k, :k] = -Td
    Mk[0, k] = (g_norm / delta) ** 2
    Mk[k:, :k] = np.eye(k)
    Mk[k:, k:] = -Td
    return Mk


def ritz_vector_of_Mk(T: SymTridiagonal, lam_k: float) -> np.ndarray:
    """Unit eigenvector of ``M_k`` for ``lambda_k``: ``z2 ~ (T+lam I)^{-2} e_1``,
    ``z1 = (T + lam I) z2``."""
    e1 = np.zeros(T.k)
    e1[0] = 1.0
    z1 = tridiag_shift_solve(T, lam_k, e1, power=1)
    z2 = tridiag_shift_solve(T, lam_k, z1, power=1)
    z = np.concatenate([z1, z2])
    return z / np.linalg.norm(z)


def _complement_projection(Mk: np.ndarray, z: np.ndarray) -> np.ndarray:
    # C = Z^T M Z with Z = H[:, 1:], H = I - 2uu^T, via a rank-two update
    u = householder_vector(z)
    Mu = Mk @ u
    uM = u @ Mk
    uMu = float(u @ Mu)
    HMH = Mk - 2.0 * np.outer(u, uM) - 2.0 * np.outer(Mu, u) + 4.0 * uMu * np.outer(u, u)
    return HMH[1:, 1:]


def eps_k(ctx: BoundContext, k: int, eps_exact: float):
    """``(eps_k, 2 Delta t^k)``."""
    return eps_exact, 2.0 * ctx.delta * ctx.t**k


def fgap_dist_bounds(ctx: BoundContext, k: int, eps: float) -> dict:
    A, D, t, kap = ctx.A_opt_norm, ctx.delta, ctx.t, ctx.kappa
    ratio = 1.0 + eps * eps / (D * D)
    return {
        "fgap_old_Thm31": 2.0 * A * eps * eps,
        "fgap_new_318": 0.5 * A * ratio * eps * eps,
        "fgap_new_1052": 2.0 * A * (D * D + eps * eps) * t ** (2 * k),
        "dist_old_1055": 2.0 * math.sqrt(kap) * eps,
        "dist_new_1019": math.sqrt(kap * ratio) * eps,
        "dist_new_1053": 2.0 * math.sqrt(kap * (D * D + eps * eps)) * t**k,
    }


def _eta(ctx: BoundContext, e1_inv2: float):
    denom = ctx.delta**2 + ctx.g_norm**2 * e1_inv2
    return ctx.g_norm**2 / denom, 2.0 / denom


def residual_bounds(
    ctx: BoundContext, k: int, eps: float, beta: float, x_norm: float, kappa_k: float, Tnorm_k: float, e1_inv2: float
) -> dict:
    """Residual bounds.  ``kappa_k`` and ``Tnorm_k`` describe ``T_k + lambda_k I``;
    ``e1_inv2 = e_1^T (T_k + lambda_opt I)^{-2} e_1`` feeds the eta constants."""
    A, D, t, kap, gn = ctx.A_opt_norm, ctx.delta, ctx.t, ctx.kappa, ctx.g_norm
    tk = convergence_factor(kappa_k)
    eta1, eta2 = _eta(ctx, e1_inv2)
    b1 = A * math.sqrt(D * D + eps * eps) * t**k
    b2 = beta * D * tk ** (k - 1)
    return {
        "resid_jia_1027": 4.0 * math.sqrt(kap) * A * D * t**k
        + (4.0 * eta1 * D * D / gn + 8.0 * A * eta2 * D**3) * t ** (2 * k),
        "resid_gould_1028": gn * 2.0 * beta * kappa_k / Tnorm_k * tk ** (k - 1),
        "resid_new_411": A * math.sqrt(1.0 + eps * eps / (D * D)) * eps,
        "resid_new_450": 2.0 * b1,
        "resid_new_1215": 2.0 * beta * x_norm * tk ** (k - 1),
        "resid_min_1057": 2.0 * min(b1, b2),
    }


def jia_c_k(ctx: BoundContext, k: int) -> float:
    t = ctx.t
    if t <= 0.0 or ctx.spread <= 0.0:
        return 2.0
    return 2.0 + 16.0 * ctx.A_opt_norm / (ctx.spread**2 * (1.0 - t * t)) * (1.0 + (k + 2) / abs(math.log(t))) * t * t


def angle_bounds(ctx: BoundContext, k: int, eps: float, sin_y_Sk: float, sep_k: float | None) -> dict:
    kap, t = ctx.kappa, ctx.t
    s = eps / ctx.delta
    ck = jia_c_k(ctx, k)
    jia = None
    if sep_k is not None and sep_k > SEP_TOL and ctx.M_norm is not None and sin_y_Sk < 1.0:
        jia = ck * (1.0 + ctx.M_norm / (math.sqrt(1.0 - sin_y_Sk**2) * sep_k)) * t**k
    return {
        "angle_jia_11_23": jia,
        "angle_new_1518": math.sqrt(kap) * math.sqrt(s * s + s**4),
        "angle_new_16_06": 2.0 * math.sqrt(kap) * t**k + 4.0 * math.sqrt(kap) * t ** (2 * k),
        "c_k": ck,
    }


def lambda_bounds(
    ctx: BoundContext,
    k: int,
    beta: float,
    s_k: float,
    r_tilde: float,
    sin_y2_K: float,
    sin_y_Sk: float,
    e1_inv2: float,
    z_dot: float | None,
) -> dict:
    """Multiplier bounds; ``z_dot = z_1^T z_2`` of the Ritz vector of ``M_k``."""
    A, D, t, kap, gn = ctx.A_opt_norm, ctx.delta, ctx.t, ctx.kappa, ctx.g_norm
    eta1, eta2 = _eta(ctx, e1_inv2)
    ratio = ctx.y1_norm / ctx.y2_norm
    return {
        "lamgap_jia_1115": (4.0 * eta1 * D / gn + 8.0 * A * eta2 * D * D) * t ** (2 * k),
        "lamgap_jia_1503": None if not z_dot else beta / (2.0 * abs(z_dot)) * sin_y_Sk,
        "lamgap_new_eq144": s_k * r_tilde / gn * sin_y2_K,
        "lamgap_new_eq1434": s_k * 2.0 * beta * D / (ctx.y2_norm * gn) * t ** (k - 1) * sin_y_Sk,
        "lamgap_new_826": 2.0 * s_k * (1.0 + 2.0 * ratio * k * math.sqrt(kap) / A) * t ** (2 * k),
    }


def shadow_iterate(T: SymTridiagonal, g_norm: float, lam_opt: float, beta: float, Q=None) -> ShadowIterate:
    e1 = np.zeros(T.k)
    e1[0] = -g_norm
    h = tridiag_shift_solve(T, lam_opt, e1)
    return ShadowIterate(h, None if Q is None else Q @ h, float(beta * abs(h[-1])))


def shadow_gap(ctx: BoundContext, k: int, h_tilde: np.ndarray):
    """``(||x_opt||^2 - ||x~_k||^2, upper bound)``."""
    x2 = float(ctx.exact.x_opt @ ctx.exact.x_opt)
    gap = x2 - float(h_tilde @ h_tilde)
    bound = (
        4.0 * ctx.g_norm * ctx.w_norm
        * (1.0 + 2.0 * ctx.y1_norm * k * math.sqrt(ctx.kappa) / (ctx.y2_norm * ctx.A_opt_norm))
        * ctx.t ** (2 * k)
    )
    return gap, bound


def _sep(T: SymTridiagonal, lam_k: float, lam_opt: float, g_norm: float, delta: float):
    Mk = projected_M(T, g_norm, delta)
    z = ritz_vector_of_Mk(T, lam_k)
    C = _complement_projection(Mk, z)
    return sigma_min(lam_opt * np.eye(C.shape[0]) - C)


def trace_bounds(problem, result, exact: ExactSolution, compute_sep: bool = True, sep_stride: int = 1):
    """Evaluate every bound at every recorded iteration of ``result``.

    ``sep_stride`` > 1 computes ``sep(lambda_opt, C_k)`` (an O(k^3) quantity)
    only on every ``sep_stride``-th iteration and the last one.
    Returns ``(rows, ctx)``.
    """
    ctx = BoundContext.build(problem, exact, with_M_norm=compute_sep)
    fac = result.factorization
    Qall = fac.Q
    Tall = fac.T
    betas = fac.betas
    lam_opt = exact.lambda_opt
    g_norm = ctx.g_norm
    delta = ctx.delta
    x_opt = exact.x_opt
    x2 = float(x_opt @ x_opt)
    w = exact.apply_shifted_inverse(x_opt)
    r_x = np.array(x_opt, dtype=float)
    r_w = np.array(w, dtype=float)
    coef = np.zeros(len(result.trace))
    K = len(result.trace)
    rows = []
    for idx, rec in enumerate(result.trace):
        k = rec.k
        q = Qall[:, k - 1]
        c = float(q @ r_x)
        coef[k - 1] = float(q @ x_opt)
        r_x -= c * q
        r_w -= float(q @ r_w) * q
        eps = float(np.linalg.norm(r_x))
        sin_y1 = eps / math.sqrt(x2)
        sin_y2 = float(np.linalg.norm(r_w)) / ctx.w_norm
        sin_y_Sk = math.sqrt((ctx.y1_norm * sin_y1) ** 2 + (ctx.y2_norm * sin_y2) ** 2)

        row = BoundRow(k=k, boundary=bool(rec.boundary), lambda_k=rec.lambda_k, beta_k=rec.beta_k)
        row.resid_actual = rec.residual_norm
        row.lamgap_actual = lam_opt - rec.lambda_k
        row.eps_k_exact = eps
        row.sin_y2_K = sin_y2
        row.sin_y_Sk = sin_y_Sk
        rows.append(row)
        if not rec.boundary:
            continue

        T = Tall.leading(k)
        beta = float(betas[k - 1])
        e1 = np.zeros(k)
        e1[0] = -g_norm
        h = tridiag_shift_solve(T, rec.lambda_k, e1)
        x_norm = float(np.linalg.norm(h))
        # actual errors, in Krylov coordinates where possible
        ck = coef[:k]
        row.dist_actual = math.sqrt(float((h - ck) @ (h - ck)) + eps * eps)
        chi = float(h @ ck) / x2
        perp = h - chi * ck
        row.angle_actual = math.sqrt(max(float(perp @ perp) + (chi * eps) ** 2, 0.0)) / x_norm
        d = Qall[:, :k] @ h - x_opt
        Ad = problem.A.matvec(d) + lam_opt * d
        row.fgap_actual = 0.5 * float(d @ Ad) + 0.5 * lam_opt * (x2 - x_norm * x_norm)

        row.eps_k_exact, row.eps_k_bound = eps_k(ctx, k, eps)
        for key, val in fgap_dist_bounds(ctx, k, eps).items():
            setattr(row, key, val)

        theta_min, theta_max = tridiag_extreme_eigs(T)
        kappa_k = (theta_max + rec.lambda_k) / (theta_min + rec.lambda_k)
        row.kappa_k = kappa_k
        row.kappa_tilde_k = (theta_max + lam_opt) / (theta_min + lam_opt)

        shadow = shadow_iterate(T, g_norm, lam_opt, beta)
        e1_inv2 = float(shadow.h_tilde @ shadow.h_tilde) / g_norm**2
        for key, val in residual_bounds(
            ctx, k, eps, beta, x_norm, kappa_k, theta_max + rec.lambda_k, e1_inv2
        ).items():
            setattr(row, key, val)

        sep_k = None
        z = ritz_vector_of_Mk(T, rec.lambda_k)
        z_dot = float(z[:k] @ z[k:])
        if compute_sep and (idx == K - 1 or (idx % max(sep_stride, 1)) == 0):
            sep_k = _sep(T, rec.lambda_k, lam_opt, g_norm, delta)
        row.sep_k = sep_k
        for key, val in angle_bounds(ctx, k, eps, sin_y_Sk, sep_k).items():
            setattr(row, key, val)

        unit = np.zeros(k)
        unit[0] = 1.0
        e1_inv3 = float(tridiag_shift_solve(T, lam_opt, unit, power=3)[0])
        s_k = ctx.w_norm / (g_norm * e1_inv3)
        row.s_k = s_k
        for key, val in lambda_bounds(
            ctx, k, beta, s_k, shadow.r_tilde_norm, sin_y2, sin_y_Sk, e1_inv2, z_dot
        ).items():
            setattr(row, key, val)

        row.shadow_gap, row.shadow_gap_bound = shadow_gap(ctx, k, shadow.h_tilde)
        tt = convergence_factor(row.kappa_tilde_k)
        row.shadow_resid = shadow.r_tilde_norm
        row.shadow_resid_bound = 2.0 * delta * beta * tt ** (k - 1)
    return rows, ctx
