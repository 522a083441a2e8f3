"""Cross-validation of the forest surrogate.

Produces the fit-quality numbers shown next to importance scores and
suggested ranges, so users can weigh the guidance. Folds that end up with
zero target variance (tiny real-world logs hit this constantly) are
reported invalid and excluded from the mean instead of failing the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .forest import ForestConfig, fit_forest, r_squared
from .space import Dataset, InsufficientTrialsError, design_matrix


class CrossValidationError(ValueError):
    """The requested validation protocol cannot run on this dataset."""


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed % 2**63, *key]))


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed % 2**63, 1 + fold]).generate_state(1)[0])


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """The seeded k-fold partition of range(n): disjoint, covering, sizes
    differing by at most one."""
    order = _rng(seed, 0).permutation(n)
    return np.array_split(order, k)


def holdout_split(
    dataset: Dataset, train_fraction: float, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then split at floor(n * train_fraction).

    Floor (not round) keeps e.g. a 0.4 fraction of 244 trials at 97/147.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(dataset.trials)
    if n < 2:
        raise InsufficientTrialsError(f"insufficient trials: {n} (need >= 2)")
    n_train = int(np.floor(n * train_fraction))
    if n_train == 0 or n_train == n:
        raise ValueError(f"train_fraction {train_fraction} leaves an empty side for n={n}")
    order = _rng(seed, 0).permutation(n)
    trials = dataset.trials
    train = tuple(trials[i] for i in order[:n_train])
    test = tuple(trials[i] for i in order[n_train:])
    return (
        Dataset(space=dataset.space, trials=train, version=len(train)),
        Dataset(space=dataset.space, trials=test, version=len(test)),
    )


@dataclass(frozen=True)
class CVReport:
    """Per-fold and mean R-squared for one metric.

    fold_scores has one entry per fold; None marks a fold whose test split
    had zero target variance (excluded from the mean, noted in warnings).
    n_train is the usable-trial pool size the folds partition.
    """

    metric: str
    k: int
    seed: int
    fold_scores: tuple[float | None, ...]
    mean_score: float
    n_train: int
    forest_config: ForestConfig
    warnings: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "k": self.k,
            "seed": self.seed,
            "fold_scores": list(self.fold_scores),
            "mean_score": self.mean_score,
            "n_train": self.n_train,
            "forest_config": self.forest_config.to_doc(),
            "warnings": list(self.warnings),
        }


def kfold_r2(
    dataset: Dataset,
    metric: str,
    k: int = 10,
    config: ForestConfig | None = None,
    seed: int = 0,
    include_early_stopped: bool = False,
) -> CVReport:
    """Seeded k-fold cross-validation scored by R-squared.

    Folds partition the usable trials with sizes differing by at most one;
    each fold is scored by a forest fitted on its complement with a
    fold-derived seed, so parallel and sequential execution agree.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    config = config or ForestConfig()
    X, y, _ids = design_matrix(dataset, metric, include_early_stopped=include_early_stopped)
    n = y.size
    if k > n:
        raise CrossValidationError(f"k={k} exceeds the {n} usable trials")

    folds = fold_indices(n, k, seed)
    order = np.concatenate(folds)

    scores: list[float | None] = []
    warnings: list[str] = []
    for j, test_idx in enumerate(folds):
        if np.ptp(y[test_idx]) == 0.0:
            scores.append(None)
            warnings.append(f"fold {j}: zero variance in test targets; excluded from mean")
            continue
        train_idx = np.setdiff1d(order, test_idx, assume_unique=True)
        forest = fit_forest(
            X[train_idx],
            y[train_idx],
            dataset.space,
            dataset.space.metric(metric),
            config,
            seed=_fold_seed(seed, j),
        )
        scores.append(r_squared(forest, X[test_idx], y[test_idx]))

    valid = [s for s in scores if s is not None]
    if not valid:
        raise CrossValidationError("all folds invalid: zero variance in every test split")
    return CVReport(
        metric=metric,
        k=k,
        seed=seed,
        fold_scores=tuple(scores),
        mean_score=float(np.mean(valid)),
        n_train=n,
        forest_config=config,
        warnings=tuple(warnings),
    )
