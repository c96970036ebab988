import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gltrlab.chebyshev import (
    ResidualPolySpec,
    cheb_closed_form,
    cheb_eval,
    cheb_eval_derivs,
    convergence_factor,
    residual_poly_derivs_at_zero,
    residual_poly_eval,
)
from gltrlab.core import Rng


def test_cheb_examples():
    for k in range(8):
        assert cheb_eval(k, 1.0) == 1.0
    assert cheb_eval(2, 3.0) == 17.0
    assert cheb_eval(3, 0.5) == pytest.approx(-1.0, abs=1e-15)


def test_recurrence_matches_closed_form():
    r = Rng(11)
    xs = 1.0 + 9.0 * r.uniform(100)
    signs = np.where(r.uniform(100) < 0.5, -1.0, 1.0)
    for x, k in zip(xs * signs, (r.uniform(100) * 25).astype(int)):
        assert cheb_eval(int(k), x) == pytest.approx(cheb_closed_form(int(k), x), rel=1e-10)


def test_derivative_triples():
    # C_3 = 4x^3 - 3x
    v, d, dd = cheb_eval_derivs(3, 1.7)
    assert v == pytest.approx(4 * 1.7**3 - 3 * 1.7)
    assert d == pytest.approx(12 * 1.7**2 - 3)
    assert dd == pytest.approx(24 * 1.7)


def test_residual_poly_normalized_at_zero():
    for k in range(6):
        assert residual_poly_eval(ResidualPolySpec(k, 1.0, 4.0), 0.0) == pytest.approx(1.0, rel=1e-13)


def test_residual_poly_midpoint_degree_zero():
    assert residual_poly_eval(ResidualPolySpec(0, 1.0, 4.0), 2.5) == pytest.approx(0.0, abs=1e-15)


def test_residual_poly_sup_bound():
    spec = ResidualPolySpec(3, 1.0, 9.0)
    assert spec.t == pytest.approx(0.5)
    xs = np.linspace(1.0, 9.0, 1000)
    assert max(abs(residual_poly_eval(spec, x)) for x in xs) <= 0.125 + 1e-15


def test_matrix_form_bound():
    r = Rng(5)
    for trial in range(20):
        n = 5 + trial
        evals = 0.1 + 10.0 * r.uniform(n)
        spec = ResidualPolySpec(trial % 7, float(evals.min()), float(evals.max()))
        norm = max(abs(residual_poly_eval(spec, x)) for x in evals)
        assert norm <= 2.0 * spec.t ** (spec.degree + 1) + 1e-10


def test_derivs_near_unit_condition():
    spec = ResidualPolySpec(1, 1.0, 1.0 + 1e-9)
    d1, d2 = residual_poly_derivs_at_zero(spec)
    assert -d1 <= 1.0 / spec.lambda_max + 1e-6
    assert d2 >= -1e-8


def test_derivs_size_bound():
    spec = ResidualPolySpec(4, 1.0, 9.0)
    d1, d2 = residual_poly_derivs_at_zero(spec)
    assert 0.0 <= -d1 <= 4 * 3 / 9 + 1e-8
    assert d2 >= -1e-8


def test_derivs_match_finite_differences():
    spec = ResidualPolySpec(5, 2.0, 11.0)
    k = spec.degree
    ell = (spec.lambda_max + spec.lambda_min) / (spec.lambda_max - spec.lambda_min)
    width = spec.lambda_max - spec.lambda_min

    def g(x):
        return cheb_eval(k, ell - 2 * x / width) / cheb_eval(k, ell)

    h = 1e-4
    d1, d2 = residual_poly_derivs_at_zero(spec)
    assert d1 == pytest.approx((g(h) - g(-h)) / (2 * h), rel=1e-6)
    assert d2 == pytest.approx((g(h) - 2 * g(0) + g(-h)) / h**2, rel=1e-4)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 40),
    st.floats(0.01, 100.0),
    st.floats(1.0, 1e4),
)
def test_derivative_bounds_property(k, lam_min, ratio):
    spec = ResidualPolySpec(k, lam_min, lam_min * ratio)
    d1, d2 = residual_poly_derivs_at_zero(spec)
    assert -d1 >= -1e-12
    assert -d1 <= k * math.sqrt(spec.kappa) / spec.lambda_max * (1 + 1e-10) + 1e-12
    assert d2 >= -1e-8 * max(1.0, abs(d2))


def test_convergence_factor():
    assert convergence_factor(1.0) == 0.0
    assert convergence_factor(9.0) == pytest.approx(0.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        ResidualPolySpec(1, 0.0, 1.0)
    with pytest.raises(ValueError):
        residual_poly_derivs_at_zero(ResidualPolySpec(0, 1.0, 2.0))
