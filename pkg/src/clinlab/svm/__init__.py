"""Binary RBF-kernel SVM: SMO training (compiled core with pure-Python
fallback), stratified cross-validation, and cost/gamma grid screening."""

from .grid import (
    DEFAULT_COSTS,
    DEFAULT_GAMMAS,
    ConfusionMatrix,
    GridCell,
    GridResult,
    Metrics,
    grid_search,
    metrics,
    refit_at,
    refit_best,
    stratified_folds,
)
from .kernel import rbf_kernel, rbf_kernel_matrix
from .smo import (
    SmoConfig,
    SvmModel,
    active_backend,
    decision_values,
    dual_objective,
    kkt_violation,
    predict,
    predict_labels,
    solver_backends,
    train_smo,
)

__all__ = [
    "DEFAULT_COSTS",
    "DEFAULT_GAMMAS",
    "ConfusionMatrix",
    "GridCell",
    "GridResult",
    "Metrics",
    "SmoConfig",
    "SvmModel",
    "active_backend",
    "decision_values",
    "dual_objective",
    "grid_search",
    "kkt_violation",
    "metrics",
    "predict",
    "predict_labels",
    "rbf_kernel",
    "rbf_kernel_matrix",
    "refit_at",
    "refit_best",
    "solver_backends",
    "stratified_folds",
    "train_smo",
]
