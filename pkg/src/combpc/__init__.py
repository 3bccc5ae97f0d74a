"""Combined smoother/preconditioner toolkit for SPD sparse systems.

A Gauss-Seidel or AMG smoother ``S`` and an incomplete Cholesky
preconditioner ``B`` are combined into the SPD operator ``B_co`` with
error propagation ``(I - S^T A)(I - B A)(I - S A)``, used inside PCG.
"""

from .amg import AmgHierarchy, setup as amg_setup
from .combined import CombinedPreconditioner, Mode
from .errors import (
    BreakdownError,
    CertificateViolation,
    DimensionError,
    FactorizationError,
    IndefiniteError,
    MatrixMarketError,
    SetupError,
)
from .ilu import ichol, ilu
from .krylov import SolveConfig, SolveReport, pcg
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .operators import LinearOperator
from .problems import ProblemSpec, generate
from .smoothers import Smoother, SmootherKind
from .sparse import SparseMatrix
from .spectral import certify_condition_bound, certify_spd, estimate_m0_m1, estimate_rho

__version__ = "0.1.0"

__all__ = [
    "AmgHierarchy", "amg_setup", "CombinedPreconditioner", "Mode", "BreakdownError",
    "CertificateViolation", "DimensionError", "FactorizationError", "IndefiniteError",
    "MatrixMarketError", "SetupError", "ichol", "ilu", "SolveConfig", "SolveReport", "pcg",
    "read_matrix_market", "read_vector", "write_matrix_market", "write_vector",
    "LinearOperator", "ProblemSpec", "generate", "Smoother", "SmootherKind", "SparseMatrix",
    "certify_condition_bound", "certify_spd", "estimate_m0_m1", "estimate_rho",
]
