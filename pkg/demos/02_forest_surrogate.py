"""Fit the regression-forest surrogate and poke at its structure.

The forest maps configurations to a metric with axis-aligned trees:
splits maximize variance reduction, thresholds sit at midpoints of
adjacent observed values, and everything is deterministic for a seed.
"""

import json

import numpy as np

from tunelens import (
    ForestConfig,
    fit_forest,
    forest_from_doc,
    forest_to_doc,
    parse_space,
    predict,
    predict_batch,
    r_squared,
)
from tunelens.forest import Leaf, iter_leaves

space = parse_space(
    json.dumps(
        {
            "params": [
                {"name": "lr", "lower": 0.0, "upper": 1.0},
                {"name": "dropout", "lower": 0.0, "upper": 0.5},
            ],
            "metrics": [{"name": "score", "direction": "maximize"}],
        }
    )
)

rng = np.random.default_rng(7)
X = np.column_stack([rng.random(300), rng.uniform(0, 0.5, 300)])
y = np.sin(3 * X[:, 0]) - (X[:, 1] - 0.2) ** 2 + 0.05 * rng.standard_normal(300)

config = ForestConfig(n_trees=50, min_samples_leaf=2)
forest = fit_forest(X, y, space, space.metric("score"), config, seed=42)

print(f"{len(forest.trees)} trees; leaves per tree:",
      [len(list(iter_leaves(t))) for t in forest.trees[:8]], "...")
print("training R^2:", round(r_squared(forest, X, y), 4))
print("predict at (0.5, 0.2):", round(predict(forest, [0.5, 0.2]), 4))

# Predictions interpolate the observed target range, never extrapolate
grid = np.column_stack([np.linspace(0, 1, 50), np.full(50, 0.2)])
preds = predict_batch(forest, grid)
print("prediction range:", (round(preds.min(), 3), round(preds.max(), 3)),
      "observed range:", (round(y.min(), 3), round(y.max(), 3)))

# A single tree is just nested split rules; walk the first one a little
def describe(node, indent=0, depth_left=2):
    pad = "  " * indent
    if isinstance(node, Leaf):
        print(f"{pad}leaf value={node.value:.3f} count={node.count}")
    elif depth_left == 0:
        print(f"{pad}...")
    else:
        print(f"{pad}{space.param_names[node.feature]} < {node.threshold:.4f} ?")
        describe(node.left, indent + 1, depth_left - 1)
        describe(node.right, indent + 1, depth_left - 1)

describe(forest.trees[0])

# Serialization round-trips exactly (pre-order node arrays)
doc = forest_to_doc(forest)
clone = forest_from_doc(json.loads(json.dumps(doc)))
assert clone == forest
print("serialization round-trip: exact")
