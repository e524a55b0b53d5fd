"""RaFFLE: random forests of piecewise-linear model trees, with CART and
linear baselines and an evaluation harness."""

from .baselines import (
    LinearModel,
    cart_forest_params,
    cart_tree_params,
    fit_cart_forest,
    fit_cart_tree,
    fit_ols,
    fit_ridge,
)
from .datasets import Dataset, IngestError, IngestReport, ingest
from .estimators import (
    CartForestRegressor,
    CartTreeRegressor,
    OlsRegressor,
    PilotRegressor,
    RaffleRegressor,
    RidgeCvRegressor,
)
from .evaluation import (
    CvReport,
    GridResult,
    SimConfig,
    SimResult,
    categorize_linearity,
    desk_sim_config,
    grid_search,
    paper_sim_config,
    relative_scores,
    run_cv,
    simulate_linear_convergence,
)
from .forest import (
    ForestParams,
    RaffleForestModel,
    draffle_params,
    feature_usage,
    fit_forest,
    load_forest,
    predict_forest,
    save_forest,
)
from .node_models import ConfigurationError, DfConfig, ModelKind, bic_alpha, nu_alpha
from .tree import (
    PilotTreeModel,
    TreeParams,
    build_tree,
    load_tree,
    predict_tree,
    save_tree,
)
from .utils import kfold_indices, r2_score

__version__ = "0.1.0"

__all__ = [
    "CartForestRegressor",
    "CartTreeRegressor",
    "ConfigurationError",
    "CvReport",
    "Dataset",
    "DfConfig",
    "ForestParams",
    "GridResult",
    "IngestError",
    "IngestReport",
    "LinearModel",
    "ModelKind",
    "OlsRegressor",
    "PilotRegressor",
    "PilotTreeModel",
    "RaffleForestModel",
    "RaffleRegressor",
    "RidgeCvRegressor",
    "SimConfig",
    "SimResult",
    "TreeParams",
    "bic_alpha",
    "build_tree",
    "cart_forest_params",
    "cart_tree_params",
    "categorize_linearity",
    "desk_sim_config",
    "draffle_params",
    "feature_usage",
    "fit_cart_forest",
    "fit_cart_tree",
    "fit_forest",
    "fit_ols",
    "fit_ridge",
    "grid_search",
    "ingest",
    "kfold_indices",
    "load_forest",
    "load_tree",
    "nu_alpha",
    "paper_sim_config",
    "predict_forest",
    "predict_tree",
    "r2_score",
    "relative_scores",
    "run_cv",
    "save_forest",
    "save_tree",
    "simulate_linear_convergence",
]
