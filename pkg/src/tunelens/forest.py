"""Regression-forest surrogate mapping configurations to a metric.

Hand-rolled CART-style trees: axis-aligned splits chosen by variance
reduction, thresholds at midpoints of adjacent sorted values, routing
convention "left iff value < threshold" everywhere. The forest is the one
surrogate behind importance scores, suggested ranges, and fit-quality
numbers, so fitting is strictly deterministic for a given seed.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Union

import numpy as np

from .space import MetricDef, SpaceDef


class ZeroVarianceError(ValueError):
    """R-squared is undefined: the reference targets have zero variance."""


@dataclass(frozen=True)
class Leaf:
    value: float  # mean of the training targets routed here
    count: int

    @property
    def is_leaf(self) -> bool:
        return True


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"

    @property
    def is_leaf(self) -> bool:
        return False


TreeNode = Union[Split, Leaf]


@dataclass(frozen=True)
class ForestConfig:
    """Fitting knobs. Defaults are conventional; the serialized model records them."""

    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 2
    feature_subsample: float = 1.0 / 3.0  # fraction of features tried per split, floor >= 1
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not (0.0 < self.feature_subsample <= 1.0):
            raise ValueError("feature_subsample must be in (0, 1]")

    def to_doc(self) -> dict[str, Any]:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "feature_subsample": self.feature_subsample,
            "bootstrap": self.bootstrap,
        }

    @staticmethod
    def from_doc(doc: Mapping[str, Any]) -> "ForestConfig":
        return ForestConfig(
            n_trees=int(doc.get("n_trees", 100)),
            max_depth=None if doc.get("max_depth") is None else int(doc["max_depth"]),
            min_samples_leaf=int(doc.get("min_samples_leaf", 2)),
            feature_subsample=float(doc.get("feature_subsample", 1.0 / 3.0)),
            bootstrap=bool(doc.get("bootstrap", True)),
        )


@dataclass(frozen=True)
class Forest:
    """A fitted ensemble, immutable and safe for concurrent prediction."""

    trees: tuple[TreeNode, ...]
    space_fingerprint: str
    target_metric: str
    direction: str
    seed: int
    config: ForestConfig
    n_features: int

    def __post_init__(self) -> None:
        if not self.trees:
            raise ValueError("forest needs at least one tree")


def _tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    # Counter-based derivation: tree i always sees the same stream, so a
    # parallel fit would reproduce the sequential result.
    return np.random.default_rng(np.random.SeedSequence([seed % 2**63, tree_index]))


def _best_split(
    X: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Best (feature, threshold) by variance reduction, or None.

    Ties break to the lowest feature index, then the lowest threshold.
    """
    n = y.size
    best_gain = 0.0
    best: tuple[int, float] | None = None
    positions = np.arange(1, n)
    for f in features:
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue
        ys = y[order]
        ok = xs[1:] > xs[:-1]
        if min_leaf > 1:
            ok &= (positions >= min_leaf) & (n - positions >= min_leaf)
        if not ok.any():
            continue
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        nl = positions
        nr = n - nl
        sl, ql = csum[:-1], csq[:-1]
        sse_left = ql - sl * sl / nl
        sse_right = (csq[-1] - ql) - (csum[-1] - sl) ** 2 / nr
        total_sse = csq[-1] - csum[-1] ** 2 / n
        gain = np.where(ok, total_sse - (sse_left + sse_right), -np.inf)
        j = int(np.argmax(gain))  # first max: lowest threshold for this feature
        if gain[j] > best_gain:
            best_gain = float(gain[j])
            p = j + 1  # left takes sorted[:p]
            threshold = (xs[p - 1] + xs[p]) / 2.0
            if not xs[p - 1] < threshold:  # midpoint collapsed onto the lower value
                threshold = float(xs[p])
            best = (int(f), float(threshold))
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    depth: int,
    rng: np.random.Generator,
    config: ForestConfig,
    n_feat_try: int,
) -> TreeNode:
    yn = y[rows]
    n = rows.size
    if (
        n < 2 * config.min_samples_leaf
        or (config.max_depth is not None and depth >= config.max_depth)
        or np.ptp(yn) == 0.0
    ):
        return Leaf(value=float(yn.mean()), count=int(n))

    d = X.shape[1]
    if n_feat_try >= d:
        features = np.arange(d)
    else:
        features = np.sort(rng.choice(d, size=n_feat_try, replace=False))
    found = _best_split(X[rows], yn, features, config.min_samples_leaf)
    if found is None:
        return Leaf(value=float(yn.mean()), count=int(n))
    feature, threshold = found
    mask = X[rows, feature] < threshold
    left = _grow(X, y, rows[mask], depth + 1, rng, config, n_feat_try)
    right = _grow(X, y, rows[~mask], depth + 1, rng, config, n_feat_try)
    return Split(feature=feature, threshold=threshold, left=left, right=right)


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    space: SpaceDef,
    metric: MetricDef,
    config: ForestConfig | None = None,
    seed: int = 0,
) -> Forest:
    """Fit the surrogate. Deterministic given (X, y, config, seed)."""
    config = config or ForestConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise ValueError("X must be n x d and y length n")
    if X.shape[0] < 2:
        raise ValueError("insufficient rows: need >= 2 training trials")
    if X.shape[1] != len(space.params):
        raise ValueError(
            f"X has {X.shape[1]} columns but the space declares {len(space.params)} params"
        )
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("X and y must be finite")

    n, d = X.shape
    n_feat_try = max(1, int(np.floor(config.feature_subsample * d)))

    # Depth is bounded by n; give recursion room for pathological chains.
    limit = sys.getrecursionlimit()
    if n + 200 > limit:
        sys.setrecursionlimit(n + 500)
    try:
        trees = []
        for t in range(config.n_trees):
            rng = _tree_rng(seed, t)
            rows = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
            trees.append(_grow(X, y, rows, 0, rng, config, n_feat_try))
    finally:
        sys.setrecursionlimit(limit)

    return Forest(
        trees=tuple(trees),
        space_fingerprint=space.fingerprint(),
        target_metric=metric.name,
        direction=metric.direction,
        seed=seed,
        config=config,
        n_features=d,
    )


def _route(node: TreeNode, x: np.ndarray) -> Leaf:
    while isinstance(node, Split):
        node = node.left if x[node.feature] < node.threshold else node.right
    return node


def predict(forest: Forest, config_values: np.ndarray) -> float:
    """Mean of the per-tree leaf values reached by this configuration."""
    x = np.asarray(config_values, dtype=float)
    if x.shape != (forest.n_features,):
        raise ValueError(
            f"dimension mismatch: expected {forest.n_features} values, got {x.shape}"
        )
    return float(np.mean([_route(t, x).value for t in forest.trees]))


def _predict_tree(node: TreeNode, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[rows] = node.value
        return
    mask = X[rows, node.feature] < node.threshold
    _predict_tree(node.left, X, rows[mask], out)
    _predict_tree(node.right, X, rows[~mask], out)


def predict_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Vectorized prediction for an n x d matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise ValueError(f"dimension mismatch: expected n x {forest.n_features}")
    acc = np.zeros(X.shape[0])
    rows = np.arange(X.shape[0])
    buf = np.empty(X.shape[0])
    for tree in forest.trees:
        _predict_tree(tree, X, rows, buf)
        acc += buf
    return acc / len(forest.trees)


def r_squared(forest: Forest, X: np.ndarray, y: np.ndarray) -> float:
    """Coefficient of determination of the forest on (X, y).

    1 - SS_res/SS_tot against mean(y); negative for fits worse than the
    mean. Clamping for display is the presentation layer's business.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        raise ValueError("need >= 2 rows to score")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError("R-squared undefined: zero variance in y")
    pred = predict_batch(forest, X)
    ss_res = float(np.sum((y - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def iter_leaves(tree: TreeNode) -> Iterator[Leaf]:
    """Leaves in pre-order (left before right)."""
    stack: list[TreeNode] = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.append(node.right)
            stack.append(node.left)


def _flatten(node: TreeNode, out: list[dict[str, Any]]) -> None:
    if isinstance(node, Leaf):
        out.append({"type": "leaf", "value": node.value, "count": node.count})
    else:
        out.append({"type": "split", "feature": node.feature, "threshold": node.threshold})
        _flatten(node.left, out)
        _flatten(node.right, out)


def _unflatten(nodes: Iterator[Mapping[str, Any]]) -> TreeNode:
    rec = next(nodes)
    if rec["type"] == "leaf":
        return Leaf(value=float(rec["value"]), count=int(rec["count"]))
    if rec["type"] != "split":
        raise ValueError(f"unknown node type {rec['type']!r}")
    left = _unflatten(nodes)
    right = _unflatten(nodes)
    return Split(
        feature=int(rec["feature"]), threshold=float(rec["threshold"]), left=left, right=right
    )


def forest_to_doc(forest: Forest) -> dict[str, Any]:
    """Serialize with trees as pre-order node arrays. Round-trips exactly."""
    trees = []
    for tree in forest.trees:
        flat: list[dict[str, Any]] = []
        _flatten(tree, flat)
        trees.append(flat)
    return {
        "space_fingerprint": forest.space_fingerprint,
        "target_metric": forest.target_metric,
        "direction": forest.direction,
        "seed": forest.seed,
        "n_features": forest.n_features,
        "config": forest.config.to_doc(),
        "trees": trees,
    }


def forest_from_doc(doc: Mapping[str, Any]) -> Forest:
    trees = []
    for flat in doc["trees"]:
        it = iter(flat)
        root = _unflatten(it)
        if next(it, None) is not None:
            raise ValueError("trailing nodes after tree reconstruction")
        trees.append(root)
    return Forest(
        trees=tuple(trees),
        space_fingerprint=doc["space_fingerprint"],
        target_metric=doc["target_metric"],
        direction=doc["direction"],
        seed=int(doc["seed"]),
        config=ForestConfig.from_doc(doc["config"]),
        n_features=int(doc["n_features"]),
    )
