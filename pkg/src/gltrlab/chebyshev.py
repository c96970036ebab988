"""Chebyshev polynomials and the shifted residual polynomials built on them.

All evaluation goes through the three-term recurrence.  Derivatives are
carried along the recurrence as (value, first, second) triples, so no
expanded coefficients and no finite-difference steps are involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ResidualPolySpec",
    "cheb_eval",
    "cheb_closed_form",
    "cheb_eval_derivs",
    "residual_poly_eval",
    "residual_poly_derivs_at_zero",
    "convergence_factor",
]


def convergence_factor(kappa: float) -> float:
    """(sqrt(kappa) - 1) / (sqrt(kappa) + 1)."""
    r = math.sqrt(kappa)
    return (r - 1.0) / (r + 1.0)


def cheb_eval(k: int, x: float) -> float:
    """Chebyshev polynomial of the first kind C_k(x)."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    if k == 0:
        return 1.0
    prev, cur = 1.0, float(x)
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def cheb_closed_form(k: int, x: float) -> float:
    """Trigonometric / hyperbolic closed form, used to cross-check the recurrence."""
    if abs(x) < 1.0:
        return math.cos(k * math.acos(x))
    root = math.sqrt(x * x - 1.0)
    if x >= 1.0:
        return 0.5 * ((x + root) ** k + (x + root) ** (-k))
    # C_k(-x) = (-1)^k C_k(x)
    return (-1.0) ** k * cheb_closed_form(k, -x)


def cheb_eval_derivs(k: int, x: float):
    """Return (C_k(x), C_k'(x), C_k''(x))."""
    if k == 0:
        return 1.0, 0.0, 0.0
    p0, d0, s0 = 1.0, 0.0, 0.0
    p1, d1, s1 = float(x), 1.0, 0.0
    for _ in range(k - 1):
        p2 = 2.0 * x * p1 - p0
        d2 = 2.0 * p1 + 2.0 * x * d1 - d0
        s2 = 4.0 * d1 + 2.0 * x * s1 - s0
        p0, d0, s0, p1, d1, s1 = p1, d1, s1, p2, d2, s2
    return p1, d1, s1


@dataclass(frozen=True)
class ResidualPolySpec:
    """Residual polynomial of degree ``degree`` on the spectrum interval of an SPD matrix.

    For ``residual_poly_eval`` the polynomial is ``1 - x*phi_k(x)`` built from
    ``C_{k+1}``; for ``residual_poly_derivs_at_zero`` it is ``g_k`` built from
    ``C_k``.  Both are normalised to equal 1 at ``x = 0``.
    """

    degree: int
    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if not 0.0 < self.lambda_min <= self.lambda_max:
            raise ValueError("need 0 < lambda_min <= lambda_max")

    @property
    def kappa(self) -> float:
        return self.lambda_max / self.lambda_min

    @property
    def t(self) -> float:
        return convergence_factor(self.kappa)

    def _argument(self, x):
        width = self.lambda_max - self.lambda_min
        return (self.lambda_max + self.lambda_min - 2.0 * x) / width


def _normalizer(t: float, m: int) -> float:
    # 2 / (t^m + t^-m), computed without overflowing t^-m for tiny t
    if t == 0.0:
        return 0.0 if m > 0 else 1.0
    return 2.0 * t**m / (1.0 + t ** (2 * m))


def residual_poly_eval(spec: ResidualPolySpec, x: float) -> float:
    """Value of the Chebyshev residual polynomial ``1 - x*phi_k(x)``.

    Uses the degree-(k+1) Chebyshev polynomial; for x in the spectrum
    interval the magnitude is at most ``2 t^(k+1)``.
    """
    m = spec.degree + 1
    if spec.lambda_max == spec.lambda_min:
        # degenerate interval: the minimax polynomial is (1 - x/lambda)^m
        return (1.0 - x / spec.lambda_min) ** m
    return _normalizer(spec.t, m) * cheb_eval(m, spec._argument(x))


def residual_poly_derivs_at_zero(spec: ResidualPolySpec):
    """First and second derivatives at 0 of ``g_k(x) = C_k(arg(x)) / C_k(arg(0))``.

    Here ``k = spec.degree`` (at least 1).  The returned pair satisfies
    ``0 <= -d1 <= k*sqrt(kappa)/lambda_max`` and ``d2 >= 0``.
    """
    k = spec.degree
    if k < 1:
        raise ValueError("derivatives need degree >= 1")
    width = spec.lambda_max - spec.lambda_min
    if width == 0.0:
        lam = spec.lambda_min
        return -k / lam, k * (k - 1) / lam**2
    ell = spec._argument(0.0)
    _, dc, ddc = cheb_eval_derivs(k, ell)
    scale = _normalizer(spec.t, k)
    slope = -2.0 / width
    return scale * dc * slope, scale * ddc * slope * slope
