from ._backend import BACKEND
from .engine import (
    SolverConfig,
    SolverResult,
    default_loss_bound_grid,
    fit_l1_regularized,
    group_affine_terms,
    select_lambda,
    solve_baseline,
    solve_eop_training,
)

__all__ = [
    "BACKEND",
    "SolverConfig",
    "SolverResult",
    "default_loss_bound_grid",
    "fit_l1_regularized",
    "group_affine_terms",
    "select_lambda",
    "solve_baseline",
    "solve_eop_training",
]
