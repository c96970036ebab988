"""gltrlab: GLTR for the trust-region subproblem, an exact oracle, and a-priori bounds."""

__version__ = "0.1.0"

from .core import Rng, SymTridiagonal, complement_basis, dense_eigh, sigma_min, tridiag_extreme_eigs, tridiag_shift_solve
from .exceptions import (
    AlreadyBrokenDown,
    AsymmetricMatrix,
    DenseTooLarge,
    DimensionMismatch,
    GltrLabError,
    InvalidInterval,
    MaxSecularIterations,
    NoConvergence,
    NotBoundaryCase,
    NotConverged,
    NotPositiveDefinite,
    ParseError,
    ZeroGradient,
    ZeroVector,
)
from .problem import (
    CallbackOperator,
    DenseOperator,
    DiagonalOperator,
    TrsProblem,
    gen_chebyshev_diag,
    gen_example1,
    gen_example2,
    gen_random_dense,
    load_problem,
    save_problem,
)
from .lanczos import LanczosFactorization, lanczos_extend, lanczos_init
from .solver import GLTR, GltrResult, IterationRecord, ReducedSolution, evaluate_f, gltr_solve, solve_reduced_trs
from .oracle import Case, ExactSolution, ExactTRS, classify_and_solve, eigvec_of_M, s_and_cond_of_lambda
from .bounds import BoundRow, trace_bounds
