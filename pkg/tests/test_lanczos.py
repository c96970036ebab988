import numpy as np
import pytest

from gltrlab.core import Rng, dense_eigh
from gltrlab.exceptions import AlreadyBrokenDown, ZeroGradient
from gltrlab.lanczos import lanczos_extend, lanczos_init
from gltrlab.problem import DenseOperator, DiagonalOperator, TrsProblem

from conftest import dense_problem, diag_problem


def run_to_breakdown(problem, reorth=True):
    state = lanczos_init(problem, reorth=reorth)
    while not state.broke_down:
        lanczos_extend(state, problem)
    return state


def random_spd(rng, n):
    G = rng.normal(n * n).reshape(n, n)
    Q, _ = np.linalg.qr(G)
    evals = 0.5 + 5.0 * rng.uniform(n)
    A = (Q * evals) @ Q.T
    return 0.5 * (A + A.T)


def test_first_step_hand_values():
    state = lanczos_init(diag_problem([1.0, 2.0], [1.0, 1.0], 1.0))
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(state.Q[:, 0], [s, s])
    assert state.deltas[0] == pytest.approx(1.5)
    assert state.beta_k == pytest.approx(0.5)
    assert abs(state.next_q @ np.array([-s, s])) == pytest.approx(1.0)


def test_identity_breaks_down_immediately():
    state = lanczos_init(diag_problem(np.ones(4), [1.0, 2.0, 3.0, 4.0], 1.0))
    assert state.deltas[0] == pytest.approx(1.0)
    assert state.broke_down and state.beta_k == 0.0 and state.k == 1


def test_zero_gradient():
    p = diag_problem([1.0, 2.0], [1.0, 0.0], 1.0)
    object.__setattr__(p, "g", np.zeros(2))
    with pytest.raises(ZeroGradient):
        lanczos_init(p)


def test_second_step_and_breakdown():
    p = diag_problem([1.0, 2.0], [1.0, 1.0], 1.0)
    state = lanczos_extend(lanczos_init(p), p)
    np.testing.assert_allclose(state.T.to_dense(), [[1.5, 0.5], [0.5, 1.5]])
    assert state.broke_down
    with pytest.raises(AlreadyBrokenDown):
        lanczos_extend(state, p)


def test_three_by_three_spectrum():
    state = run_to_breakdown(diag_problem([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 1.0))
    assert state.k == 3
    w, _ = dense_eigh(state.T.to_dense())
    np.testing.assert_allclose(np.sort(w), [1.0, 2.0, 3.0], atol=1e-10)


def test_eigenvector_start():
    state = lanczos_init(diag_problem([1.0, 2.0, 3.0], [0.0, 5.0, 0.0], 1.0))
    assert state.broke_down and state.k == 1


def test_lanczos_relation_and_orthogonality():
    rng = Rng(17)
    for n in (10, 40):
        A = random_spd(rng, n)
        A -= 2.0 * np.eye(n)
        p = dense_problem(A, rng.normal(n), 1.0)
        state = lanczos_init(p)
        for _ in range(n // 2):
            lanczos_extend(state, p)
        Q, T = state.Q, state.T.to_dense()
        k = state.k
        assert np.linalg.norm(Q.T @ Q - np.eye(k)) <= 1e-10
        R = A @ Q - Q @ T - state.beta_k * np.outer(state.next_q, np.eye(k)[-1])
        assert np.linalg.norm(R) <= 1e-10 * np.linalg.norm(A, 2)
        np.testing.assert_allclose(Q[:, 0], p.g / p.g_norm, rtol=1e-14)


def test_moment_matching():
    rng = Rng(23)
    for n in (12, 30, 40):
        A = random_spd(rng, n)
        g = rng.normal(n)
        p = dense_problem(A, g, 1.0)
        state = lanczos_init(p)
        for _ in range(4):
            lanczos_extend(state, p)
        k = state.k
        T = state.T.to_dense()
        for lam in (0.0, 0.7):
            Ash = A + lam * np.eye(n)
            Tsh = T + lam * np.eye(k)
            for j in range(1, 2 * k - 1):
                lhs = g @ np.linalg.matrix_power(Ash, j) @ g
                rhs = p.g_norm**2 * np.linalg.matrix_power(Tsh, j)[0, 0]
                assert rhs == pytest.approx(lhs, rel=1e-9)


def test_shift_invariance():
    rng = Rng(31)
    n = 25
    A = random_spd(rng, n)
    g = rng.normal(n)
    sigma = 3.25
    a = run_to_breakdown(dense_problem(A, g, 1.0))
    b = run_to_breakdown(dense_problem(A + sigma * np.eye(n), g, 1.0))
    k = min(a.k, b.k, 10)
    np.testing.assert_allclose(b.Q[:, :k], a.Q[:, :k], atol=1e-12)
    np.testing.assert_allclose(b.deltas[:k], a.deltas[:k] + sigma, atol=1e-12)
    np.testing.assert_allclose(b.betas[: k - 1], a.betas[: k - 1], atol=1e-12)


def test_breakdown_ritz_values_are_eigenvalues():
    rng = Rng(37)
    n = 15
    evals = np.repeat(np.arange(1.0, 6.0), 3)
    G = rng.normal(n * n).reshape(n, n)
    Q, _ = np.linalg.qr(G)
    A = (Q * evals) @ Q.T
    state = run_to_breakdown(dense_problem(0.5 * (A + A.T), rng.normal(n), 1.0))
    assert state.k == 5
    w, _ = dense_eigh(state.T.to_dense())
    np.testing.assert_allclose(np.sort(w), np.arange(1.0, 6.0), atol=1e-8)


def test_snapshot_is_frozen():
    p = diag_problem(np.arange(1.0, 9.0), np.ones(8), 1.0)
    state = lanczos_init(p)
    snap = state.snapshot()
    lanczos_extend(state, p)
    assert snap.k == 1 and state.k == 2
    with pytest.raises(ValueError):
        snap.Q[0, 0] = 1.0


def test_without_reorthogonalization_still_runs():
    p = diag_problem(np.linspace(1, 2, 50), np.ones(50), 1.0)
    state = lanczos_init(p, reorth=False)
    for _ in range(10):
        lanczos_extend(state, p)
    assert np.linalg.norm(state.Q.T @ state.Q - np.eye(11)) < 1e-6
