import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gltrlab.core import (
    Rng,
    SymTridiagonal,
    complement_basis,
    dense_eigh,
    ldl_tridiag,
    sigma_min,
    sturm_count,
    tridiag_extreme_eigs,
    tridiag_shift_solve,
)
from gltrlab.exceptions import NoConvergence, NotPositiveDefinite, ZeroVector

from conftest import random_spd_tridiag


class TestSymTridiagonal:
    def test_dense_roundtrip_and_matvec(self):
        T = SymTridiagonal([1.0, 2.0, 3.0], [0.5, 0.25])
        D = T.to_dense()
        np.testing.assert_array_equal(D, [[1, 0.5, 0], [0.5, 2, 0.25], [0, 0.25, 3]])
        v = np.array([1.0, -1.0, 2.0])
        np.testing.assert_allclose(T.matvec(v), D @ v)

    def test_immutable(self):
        T = SymTridiagonal([1.0, 2.0], [0.5])
        with pytest.raises(ValueError):
            T.diag[0] = 3.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            SymTridiagonal([1.0, 2.0], [0.5, 0.5])

    def test_leading_and_irreducible(self):
        T = SymTridiagonal([1.0, 2.0, 3.0], [0.5, 0.0])
        assert not T.irreducible
        assert T.leading(2).irreducible
        assert T.leading(2).k == 2


class TestShiftSolve:
    def test_scalar(self):
        np.testing.assert_allclose(tridiag_shift_solve(SymTridiagonal([2.0], []), 0.0, [1.0]), [0.5])

    def test_two_by_two_at_root_three(self):
        T = SymTridiagonal([0.0, 0.0], [1.0])
        h = tridiag_shift_solve(T, math.sqrt(3.0), [-1.0, 0.0])
        np.testing.assert_allclose(h, [-math.sqrt(3.0) / 2.0, 0.5], rtol=1e-14)

    def test_identity_cubed(self):
        T = SymTridiagonal(np.ones(5), np.zeros(4))
        e1 = np.eye(5)[0]
        np.testing.assert_allclose(tridiag_shift_solve(T, 1.0, e1, power=3), e1 / 8.0)

    def test_not_positive_definite(self):
        T = SymTridiagonal([0.0, 0.0], [1.0])
        with pytest.raises(NotPositiveDefinite):
            tridiag_shift_solve(T, 0.5, [1.0, 0.0])
        with pytest.raises(NotPositiveDefinite):
            ldl_tridiag(SymTridiagonal([-1.0], []), 0.0)

    def test_bad_power(self):
        with pytest.raises(ValueError):
            tridiag_shift_solve(SymTridiagonal([1.0], []), 0.0, [1.0], power=0)

    def test_power_equals_composition(self, rng):
        for trial in range(20):
            T = random_spd_tridiag(rng, 3 + trial)
            rhs = rng.normal(T.k)
            for p in (1, 2, 3):
                y = rhs
                for _ in range(p):
                    y = tridiag_shift_solve(T, 0.0, y)
                np.testing.assert_allclose(tridiag_shift_solve(T, 0.0, rhs, power=p), y, rtol=1e-12)

    def test_residual(self, rng):
        T = random_spd_tridiag(rng, 40)
        rhs = rng.normal(40)
        x = tridiag_shift_solve(T, 0.3, rhs)
        r = T.matvec(x) + 0.3 * x - rhs
        assert np.linalg.norm(r) <= 1e-12 * np.linalg.norm(rhs) * T.norm_estimate()


class TestExtremeEigs:
    @pytest.mark.parametrize(
        "diag, off, expected",
        [([1.5, 1.5], [0.5], (1.0, 2.0)), ([5.0], [], (5.0, 5.0)), ([0.0, 0.0], [1.0], (-1.0, 1.0))],
    )
    def test_examples(self, diag, off, expected):
        lo, hi = tridiag_extreme_eigs(SymTridiagonal(diag, off))
        assert lo == pytest.approx(expected[0], abs=1e-12 * (1 + abs(expected[0])))
        assert hi == pytest.approx(expected[1], abs=1e-12 * (1 + abs(expected[1])))

    def test_sturm_count(self):
        T = SymTridiagonal([0.0, 0.0], [1.0])
        assert [sturm_count(T, x) for x in (-2.0, 0.0, 2.0)] == [0, 1, 2]

    def test_agrees_with_jacobi(self, rng):
        for k in (2, 7, 20, 50):
            T = SymTridiagonal(rng.normal(k), np.abs(rng.normal(k - 1)) + 0.01)
            evals, _ = dense_eigh(T.to_dense())
            lo, hi = tridiag_extreme_eigs(T)
            assert lo == pytest.approx(evals[-1], abs=1e-10)
            assert hi == pytest.approx(evals[0], abs=1e-10)


class TestDenseEigh:
    def test_diagonal(self):
        w, U = dense_eigh(np.diag([1.0, 3.0]))
        np.testing.assert_array_equal(w, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(U), [[0, 1], [1, 0]])

    def test_swap_matrix(self):
        w, U = dense_eigh([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)
        s = 1 / math.sqrt(2)
        np.testing.assert_allclose(np.abs(U), [[s, s], [s, s]], rtol=1e-14)
        assert U[0, 0] * U[1, 0] > 0 and U[0, 1] * U[1, 1] < 0

    def test_scaled_identity(self):
        w, U = dense_eigh(2.0 * np.eye(4))
        np.testing.assert_array_equal(w, [2.0] * 4)
        np.testing.assert_allclose(U.T @ U, np.eye(4), atol=1e-14)

    @pytest.mark.parametrize("n", [1, 5, 31, 60])
    def test_random(self, rng, n):
        G = rng.normal(n * n).reshape(n, n)
        A = G + G.T
        w, U = dense_eigh(A)
        norm = np.linalg.norm(A, 2)
        assert np.all(np.diff(w) <= 0)
        assert np.linalg.norm(U.T @ U - np.eye(n)) <= 1e-10
        assert np.linalg.norm(A @ U - U * w) <= 1e-10 * norm
        assert abs(np.trace(A) - w.sum()) <= 1e-10 * norm

    def test_sweep_cap(self, rng):
        G = rng.normal(100).reshape(10, 10)
        with pytest.raises(NoConvergence):
            dense_eigh(G + G.T, max_sweeps=1)


class TestSigmaMin:
    def test_examples(self):
        assert sigma_min(np.diag([3.0, 0.5])) == pytest.approx(0.5, rel=1e-8)
        assert sigma_min([[0.0, 1.0], [0.0, 0.0]]) == 0.0
        assert sigma_min([[1.0, 1.0], [0.0, 1.0]]) == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-8)

    def test_matches_svd_and_rayleigh(self, rng):
        for n in (3, 10, 25):
            B = rng.normal(n * n).reshape(n, n)
            s = sigma_min(B)
            assert s == pytest.approx(np.linalg.svd(B, compute_uv=False)[-1], rel=1e-8)
            for _ in range(5):
                v = rng.normal(n)
                v /= np.linalg.norm(v)
                assert s <= np.linalg.norm(B @ v) * (1 + 1e-12)


class TestComplementBasis:
    @pytest.mark.parametrize("z", [[1.0, 0.0], [1 / math.sqrt(2), 1 / math.sqrt(2)], [0.0, 0.0, 1.0]])
    def test_examples(self, z):
        z = np.asarray(z)
        Z = complement_basis(z)
        assert Z.shape == (z.size, z.size - 1)
        np.testing.assert_allclose(Z.T @ Z, np.eye(z.size - 1), atol=1e-12)
        np.testing.assert_allclose(Z.T @ z, 0.0, atol=1e-12)

    def test_two_dim_directions(self):
        assert abs(complement_basis(np.array([1.0, 0.0]))[:, 0] @ [0, 1]) == pytest.approx(1.0)
        s = 1 / math.sqrt(2)
        assert abs(complement_basis(np.array([s, s]))[:, 0] @ [s, -s]) == pytest.approx(1.0)

    def test_zero(self):
        with pytest.raises(ZeroVector):
            complement_basis(np.zeros(3))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=12).filter(lambda v: np.linalg.norm(v) > 1e-3))
    def test_property(self, v):
        z = np.asarray(v) / np.linalg.norm(v)
        Z = complement_basis(z)
        np.testing.assert_allclose(Z.T @ Z, np.eye(z.size - 1), atol=1e-12)
        np.testing.assert_allclose(Z.T @ z, 0.0, atol=1e-12)


class TestRng:
    def test_deterministic(self):
        np.testing.assert_array_equal(Rng(7).normal(100), Rng(7).normal(100))
        assert not np.array_equal(Rng(7).normal(10), Rng(8).normal(10))

    def test_streams_differ(self):
        r = Rng(7)
        assert not np.array_equal(r.spawn(0).uniform(5), r.spawn(1).uniform(5))
        np.testing.assert_array_equal(r.spawn(3).uniform(5), Rng(7).spawn(3).uniform(5))

    def test_frozen_values(self):
        # splitmix64 reference outputs for seed 0 (published test vectors of the mixer)
        u = Rng(0).next_u64(3)
        assert [int(x) for x in u] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]

    def test_moments(self):
        x = Rng(1).normal(200000)
        assert abs(x.mean()) < 0.01
        assert abs(x.std() - 1.0) < 0.01
        u = Rng(1).uniform(100000)
        assert u.min() >= 0.0 and u.max() < 1.0
