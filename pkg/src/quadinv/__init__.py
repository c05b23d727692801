"""quadinv: matrix inversion and inverse d-th roots by gradient descent with
a right-multiplicative adaptive step size, plus baselines, a warm-start
hybrid, convergence-order analysis, and a reproducible experiment CLI.
"""

from .analysis import (
    DEFAULT_WINDOW,
    OrderEstimate,
    SpectrumInfo,
    estimate_order,
    polyrate_linear_coefficient,
    quadratic_bound_holds,
    sweep_linear_coefficient,
)
from .errors import GenerationError, NonFiniteError
from .linalg import (
    Matrix,
    frobenius_norm,
    gaussian_matrix,
    haar_orthogonal,
    identity,
    make_rng,
    matmul,
    matvec,
    spectral_norm,
)
from .problems import (
    CommutingPolynomial,
    InitScheme,
    RandomMatrixSpec,
    ScaledIdentity,
    ScaledTrueInverse,
    ZeroInit,
    gen_invertible,
    gen_rank_deficient,
    gen_spd,
    make_init,
    reduce_target,
)
from .solvers import (
    AdaptiveRight,
    AdaptiveRoot,
    CommutatorDriftError,
    EpochSchedule,
    FixedStep,
    MatrixPolynomial,
    SolveResult,
    SolverConfig,
    StepRule,
    adaptive_gd_step,
    adaptive_sgd_step,
    fixed_gd_step,
    half_sumsq,
    inversion_loss,
    kaczmarz_sweep,
    linear_loss,
    newton_step,
    polyrate_gd_step,
    root_gd_step,
    root_loss,
    solve_hybrid,
    solve_inverse_gd,
    solve_inverse_root,
    solve_inverse_sgd,
    solve_kaczmarz,
    solve_newton,
    solve_polyrate,
)
from .trace import StopReason, Trace, TraceRecord
from .traceio import read_csv, read_json, trace_from_csv, trace_to_csv, write_csv, write_json

__version__ = "0.1.0"
