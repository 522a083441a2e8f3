"""tunelens: guided hyperparameter tuning from trial logs.

Fit a regression-forest surrogate over recorded trials, decompose its
prediction variance into per-hyperparameter importance scores, extract
suggested optimal ranges from best-leaf paths, validate the fit with
k-fold R-squared, and generate next-batch configurations by naive or
adaptive grid search. A FastAPI server and a CLI expose the same
canonical payloads for the parallel-coordinates dashboard.
"""

from .bounds import (
    BoundsReport,
    PathRule,
    TreeBounds,
    aggregate_bounds,
    best_leaf,
    path_bounds,
    tree_bounds,
)
from .forest import (
    Forest,
    ForestConfig,
    Leaf,
    Split,
    ZeroVarianceError,
    fit_forest,
    forest_from_doc,
    forest_to_doc,
    predict,
    predict_batch,
    r_squared,
)
from .guidance import GuidanceUnavailableError, canonical_json, compute_guidance
from .importance import (
    Decomposition,
    ImportanceReport,
    LeafBox,
    importance_report,
    leaf_boxes,
    marginal_mean,
    selection_report,
    variance_decomposition,
)
from .space import (
    Dataset,
    Diagnostic,
    InsufficientTrialsError,
    MetricDef,
    ParamDef,
    SchemaError,
    SpaceDef,
    Trial,
    design_matrix,
    ingest_trials,
    parse_space,
)
from .suggest import (
    AdaptiveState,
    GridRange,
    GridSpec,
    adaptive_init,
    adaptive_refine,
    batch_jsonl,
    grid_points,
    naive_grid,
)
from .validate import CrossValidationError, CVReport, fold_indices, holdout_split, kfold_r2

__version__ = "0.1.0"

__all__ = [
    "AdaptiveState",
    "BoundsReport",
    "CVReport",
    "CrossValidationError",
    "Dataset",
    "Decomposition",
    "Diagnostic",
    "Forest",
    "ForestConfig",
    "GridRange",
    "GridSpec",
    "GuidanceUnavailableError",
    "ImportanceReport",
    "InsufficientTrialsError",
    "Leaf",
    "LeafBox",
    "MetricDef",
    "ParamDef",
    "PathRule",
    "SchemaError",
    "SpaceDef",
    "Split",
    "TreeBounds",
    "Trial",
    "ZeroVarianceError",
    "adaptive_init",
    "adaptive_refine",
    "aggregate_bounds",
    "batch_jsonl",
    "best_leaf",
    "canonical_json",
    "compute_guidance",
    "design_matrix",
    "fit_forest",
    "fold_indices",
    "forest_from_doc",
    "forest_to_doc",
    "grid_points",
    "importance_report",
    "ingest_trials",
    "kfold_r2",
    "holdout_split",
    "leaf_boxes",
    "marginal_mean",
    "naive_grid",
    "parse_space",
    "path_bounds",
    "predict",
    "predict_batch",
    "r_squared",
    "selection_report",
    "tree_bounds",
    "variance_decomposition",
]
