"""How much should you trust the surrogate? Holdout and k-fold R-squared.

The same ForestConfig used for importance and bounds is scored
out-of-sample, so the displayed fit quality describes the surrogate the
user actually sees.
"""

import json

import numpy as np

from tunelens import Dataset, ForestConfig, Trial, holdout_split, kfold_r2, parse_space

space = parse_space(
    json.dumps(
        {
            "params": [
                {"name": "lr", "lower": 0.0, "upper": 1.0},
                {"name": "dropout", "lower": 0.0, "upper": 1.0},
            ],
            "metrics": [{"name": "score", "direction": "maximize"}],
        }
    )
)

rng = np.random.default_rng(21)
X = rng.random((205, 2))
y = np.tanh(4 * X[:, 0]) - 0.5 * X[:, 1] + 0.05 * rng.standard_normal(205)
trials = tuple(
    Trial(
        id=f"t{i}",
        config={"lr": float(a), "dropout": float(b)},
        metrics={"score": float(v)},
        status="complete",
        created_at="2024-06-01T00:00:00+00:00",
    )
    for i, ((a, b), v) in enumerate(zip(X, y))
)
dataset = Dataset(space=space, trials=trials, version=len(trials))

train, test = holdout_split(dataset, train_fraction=0.4, seed=0)
print(f"holdout at 0.4: {len(train.trials)} train / {len(test.trials)} held out")

report = kfold_r2(dataset, "score", k=10, config=ForestConfig(n_trees=30), seed=0)
print(f"\n{report.k}-fold cross-validation over {report.n_train} trials:")
for i, s in enumerate(report.fold_scores, start=1):
    print(f"  fold {i:>2}: {'invalid' if s is None else f'{s:.3f}'}")
print(f"  mean R^2: {report.mean_score:.3f}")
for w in report.warnings:
    print("  warning:", w)

# Sanity check the protocol: shuffled targets should not be learnable
shuffled = Dataset(
    space=space,
    trials=tuple(
        Trial(id=t.id, config=t.config, metrics={"score": float(v)}, status=t.status,
              created_at=t.created_at)
        for t, v in zip(trials, rng.permutation(y))
    ),
    version=len(trials),
)
noise = kfold_r2(shuffled, "score", k=10, config=ForestConfig(n_trees=30), seed=0)
print(f"\nsame protocol on permuted targets: mean R^2 {noise.mean_score:.3f} (≈0 or below)")
