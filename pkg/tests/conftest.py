import numpy as np
import pytest

from gltrlab.core import Rng, SymTridiagonal
from gltrlab.problem import DenseOperator, DiagonalOperator, TrsProblem


def diag_problem(diag, g, delta):
    return TrsProblem(DiagonalOperator(np.asarray(diag, float)), np.asarray(g, float), delta)


def dense_problem(A, g, delta):
    return TrsProblem(DenseOperator(np.asarray(A, float)), np.asarray(g, float), delta)


def random_spd_tridiag(rng, k, shift=0.5):
    off = np.abs(rng.normal(k - 1)) + 0.1
    diag = np.abs(rng.normal(k)) + 2.0 * np.max(np.append(off, 0.0)) + shift
    return SymTridiagonal(diag, off)


@pytest.fixture
def rng():
    return Rng(2024)
