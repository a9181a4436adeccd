"""tubefit: sparse robust linear regression with a response tube and an
outlier budget, solved exactly by branch and bound over an L1 inner LP."""

from .bench import (
    EvalReport,
    EvalRow,
    GenSpec,
    LassoGrid,
    compare,
    generate,
    kfold_cv,
    mse,
)
from .core import (
    Dataset,
    DimensionError,
    FitConfig,
    Model,
    NumericalError,
    Standardizer,
    inlier_count,
    predict,
    residuals,
    standardize,
)
from .lasso import LassoConfig, SingularProblemError, fit_lasso
from .lp import LpProblem, LpSolution, LpStatus, build_l1_tube_lp, solve
from .milp import (
    BnbNode,
    FitResult,
    FitStatus,
    MilpExport,
    compute_big_m,
    enumerate_exact,
    export_milp,
    fit,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FitConfig",
    "Model",
    "Standardizer",
    "DimensionError",
    "NumericalError",
    "predict",
    "residuals",
    "inlier_count",
    "standardize",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "build_l1_tube_lp",
    "solve",
    "FitResult",
    "FitStatus",
    "BnbNode",
    "MilpExport",
    "fit",
    "enumerate_exact",
    "compute_big_m",
    "export_milp",
    "LassoConfig",
    "SingularProblemError",
    "fit_lasso",
    "GenSpec",
    "LassoGrid",
    "EvalRow",
    "EvalReport",
    "generate",
    "mse",
    "kfold_cv",
    "compare",
    "__version__",
]
