"""One forest, three reports: the analysis bundle behind the API and CLI.

Importance scores, suggested ranges, and cross-validation all derive from
a single seeded forest fit at a given dataset state, so the three views a
user sees never disagree about the surrogate. The canonical JSON encoding
lives here too: the CLI and every server endpoint serialize through the
same functions, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

from .bounds import BoundsReport, aggregate_bounds
from .forest import Forest, ForestConfig, ZeroVarianceError, fit_forest, r_squared
from .importance import Decomposition, selection_report, variance_decomposition
from .space import Dataset, design_matrix
from .validate import CrossValidationError, CVReport, kfold_r2


def canonical_json(obj: Any) -> str:
    """The one JSON encoding used for payloads everywhere."""
    return json.dumps(obj, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


class GuidanceUnavailableError(ValueError):
    """Too few usable trials to fit a meaningful surrogate."""

    def __init__(self, usable: int, required: int, metric: str):
        self.usable = usable
        self.required = required
        self.metric = metric
        super().__init__(
            f"guidance unavailable: {usable} usable trials for {metric!r}, "
            f"need >= {required}"
        )

    def to_doc(self) -> dict[str, Any]:
        return {
            "error": "guidance unavailable",
            "metric": self.metric,
            "usable_trials": self.usable,
            "required_minimum": self.required,
        }


@dataclass(frozen=True)
class GuidanceBundle:
    """Everything derived from one surrogate fit at one dataset version."""

    version: int
    metric: str
    seed: int
    forest: Forest
    decomposition: Decomposition
    bounds: BoundsReport
    cv: CVReport | None
    cv_error: str | None
    surrogate_r2: float | None


def usable_trials(dataset: Dataset, metric: str) -> int:
    return sum(
        1 for t in dataset.trials if metric in t.metrics and t.status == "complete"
    )


def compute_guidance(
    dataset: Dataset,
    metric: str,
    seed: int,
    config: ForestConfig | None = None,
    k: int = 10,
    guidance_min: int = 10,
) -> GuidanceBundle:
    """Fit the surrogate once and derive all three reports from it."""
    if metric not in dataset.space.metric_names:
        raise KeyError(f"unknown metric {metric!r}")
    usable = usable_trials(dataset, metric)
    if usable < guidance_min:
        raise GuidanceUnavailableError(usable, guidance_min, metric)

    config = config or ForestConfig()
    X, y, _ids = design_matrix(dataset, metric)
    forest = fit_forest(X, y, dataset.space, dataset.space.metric(metric), config, seed)
    try:
        surrogate_r2: float | None = r_squared(forest, X, y)
    except ZeroVarianceError:
        surrogate_r2 = None

    decomposition = variance_decomposition(forest, dataset.space, max_order=1)
    bounds = aggregate_bounds(forest, dataset.space, surrogate_r2)

    cv: CVReport | None = None
    cv_error: str | None = None
    try:
        cv = kfold_r2(dataset, metric, k=k, config=config, seed=seed)
    except (CrossValidationError, ValueError) as exc:
        cv_error = str(exc)

    return GuidanceBundle(
        version=dataset.version,
        metric=metric,
        seed=seed,
        forest=forest,
        decomposition=decomposition,
        bounds=bounds,
        cv=cv,
        cv_error=cv_error,
        surrogate_r2=surrogate_r2,
    )


def importance_payload(
    bundle: GuidanceBundle, selected: Sequence[str], dataset: Dataset
) -> dict[str, Any]:
    """ImportanceReport payload for a selection, from the cached decomposition."""
    report = selection_report(
        bundle.decomposition, dataset.space, selected, bundle.metric
    )
    return report.to_doc()


def bounds_payload(bundle: GuidanceBundle) -> dict[str, Any]:
    return bundle.bounds.to_doc()


def model_fit_payload(bundle: GuidanceBundle) -> dict[str, Any]:
    if bundle.cv is None:
        return {"metric": bundle.metric, "error": bundle.cv_error}
    return bundle.cv.to_doc()
