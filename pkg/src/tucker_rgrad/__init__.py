"""Low-multilinear-rank tensor recovery by Riemannian gradient descent."""
from .harness import PhaseGrid, TrialResult, TrialSpec, dof, random_low_rank_tensor, run_phase_grid, run_trial
from .measurement import FourierOperator, GaussianOperator, MatrixOperator, adjoint_apply, apply
from .solver import SolverConfig, SolverReport, contraction_factor, recover
from .tangent import SingularCoreError, TangentVector, densify, project_to_tangent, retract, tangent_norm
from .tensor import frobenius_norm, inner, matricize, mode_multiply, multi_mode_multiply, tensorize
from .tucker import TuckerTensor, hosvd_truncate, multilinear_rank, reconstruct, sequential_hosvd_truncate

__version__ = "0.1.0"
