"""Composite optimization with proximal gradient steps and a ladder of
acceleration schemes: Nesterov momentum with and without adaptive restarts,
windowed Anderson mixing with systematic restarts, and a damped, monitored
variant that is safeguarded enough to run on nonsmooth problems.

Problems expose a smooth gradient and a proximal map; solvers only ever
touch that interface, so the four built-in backends (l1 least squares,
l1 logistic regression, nuclear norm matrix completion, box constrained
quadratics) and user-supplied problems are interchangeable.
"""

from ._kernels import BACKEND as kernel_backend
from .core import (
    CompositeProblem,
    FunctionProblem,
    StepConfig,
    converged,
    objective,
    pg_step,
    residual,
)
from .linalg import WindowSVD, condition_number, damping_solve, reg_ls_solve
from .problems import (
    BoxQPProblem,
    LassoProblem,
    LogisticProblem,
    MatrixCompletionProblem,
    box_project,
    soft_threshold,
    svd_soft_threshold,
)
from .simgen import (
    CompletionSimSpec,
    LassoSimSpec,
    QPSimSpec,
    gen_completion_data,
    gen_lasso_data,
    gen_logistic_data,
    gen_qp,
    load_design,
    load_ratings,
)
from .solvers import (
    DaaremConfig,
    DaaremState,
    RunReport,
    TraceRecord,
    active_rows,
    anderson_proposal,
    run_aa_restart,
    run_daarem,
    run_nesterov,
    run_nesterov_restart,
    run_nidaarem,
    run_pgd,
)
from .bench import (
    ExperimentConfig,
    MethodSpec,
    lambda_max_completion,
    lambda_max_lasso,
    lambda_max_logistic,
    run_experiment,
    run_path,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "CompositeProblem",
    "FunctionProblem",
    "StepConfig",
    "pg_step",
    "residual",
    "objective",
    "converged",
    "WindowSVD",
    "condition_number",
    "reg_ls_solve",
    "damping_solve",
    "soft_threshold",
    "svd_soft_threshold",
    "box_project",
    "LassoProblem",
    "LogisticProblem",
    "MatrixCompletionProblem",
    "BoxQPProblem",
    "LassoSimSpec",
    "QPSimSpec",
    "CompletionSimSpec",
    "gen_lasso_data",
    "gen_logistic_data",
    "gen_qp",
    "gen_completion_data",
    "load_ratings",
    "load_design",
    "TraceRecord",
    "RunReport",
    "DaaremConfig",
    "DaaremState",
    "run_pgd",
    "run_nesterov",
    "run_nesterov_restart",
    "run_aa_restart",
    "run_daarem",
    "run_nidaarem",
    "anderson_proposal",
    "active_rows",
    "MethodSpec",
    "ExperimentConfig",
    "run_experiment",
    "run_path",
    "lambda_max_lasso",
    "lambda_max_logistic",
    "lambda_max_completion",
    "__version__",
]
