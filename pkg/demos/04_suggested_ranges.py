"""Extract suggested optimal ranges from the forest's best-leaf paths.

Per tree: pick the best leaf, intersect the split rules on its path into
per-param intervals. Across trees: intersect when unanimous, otherwise
report the majority-covered interval with its support fraction.
"""

import json

import numpy as np

from tunelens import (
    ForestConfig,
    aggregate_bounds,
    best_leaf,
    fit_forest,
    parse_space,
    path_bounds,
    r_squared,
)

space = parse_space(
    json.dumps(
        {
            "params": [
                {"name": "lr", "lower": 0.0, "upper": 1.0},
                {"name": "width", "kind": "discrete", "lower": 64, "upper": 1024, "step": 64},
            ],
            "metrics": [{"name": "score", "direction": "maximize"}],
        }
    )
)

# Optimum: lr on a plateau [0.55, 0.7], width >= 512 helps mildly.
rng = np.random.default_rng(11)
lr = rng.random(250)
width = rng.choice(space.params[1].lattice(), size=250)
penalty = np.where(lr < 0.55, 0.55 - lr, np.where(lr > 0.7, lr - 0.7, 0.0))
y = 1.0 - penalty + 0.0002 * width + 0.01 * rng.standard_normal(250)
X = np.column_stack([lr, width])

forest = fit_forest(X, y, space, space.metric("score"), ForestConfig(n_trees=30), seed=4)
fit_quality = r_squared(forest, X, y)

report = aggregate_bounds(forest, space, surrogate_r2=fit_quality)
print(f"suggested ranges ({report.direction} {report.metric!r}), "
      f"{report.n_trees} trees, surrogate R^2 {report.surrogate_r2:.3f}")
for name, lo, hi, support in report.params:
    print(f"  {name:<7} [{lo:.4g}, {hi:.4g}]  support {support:.2f}")
# Note the width interval snapped outward to the 64-step lattice.

# One tree's contribution, spelled out:
tree = forest.trees[0]
leaf = best_leaf(tree, "maximize")
tb = path_bounds(tree, leaf, space)
print("\nfirst tree's best leaf: value", round(tb.leaf_value, 4), "count", tb.leaf_count)
for name, lo, hi in zip(space.param_names, tb.lo, tb.hi):
    print(f"  {name:<7} [{lo:.4g}, {hi:.4g}]")
