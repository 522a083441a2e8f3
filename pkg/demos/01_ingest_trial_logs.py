"""Declare a hyperparameter space and ingest a trial log.

A space is a JSON document: numeric params (continuous or on a step
lattice) plus metrics with explicit directions. Trials arrive as JSON
lines; validation is strict about schema and finiteness, but keeps
out-of-range configurations (those runs really happened) with a warning.
"""

import json

import numpy as np

from tunelens import Dataset, design_matrix, ingest_trials, parse_space

space = parse_space(
    json.dumps(
        {
            "params": [
                {"name": "beta1", "lower": 0.5, "upper": 0.9},
                {"name": "beta2", "lower": 0.9, "upper": 0.999},
                {"name": "learning_rate", "lower": 1e-6, "upper": 1.0, "display_scale": "log"},
            ],
            "metrics": [
                {"name": "accuracy", "direction": "maximize"},
                {"name": "loss", "direction": "minimize"},
            ],
        }
    )
)
print("params:", space.param_names)
print("metrics:", [(m.name, m.direction) for m in space.metrics])

# Synthesize a small log: accuracy peaks at moderate learning rates.
rng = np.random.default_rng(0)
lines = []
for i in range(40):
    lr = float(10 ** rng.uniform(-6, 0))
    b1 = float(rng.uniform(0.5, 0.9))
    b2 = float(rng.uniform(0.9, 0.999))
    acc = float(np.exp(-((np.log10(lr) + 3) ** 2) / 4) * 0.95 + rng.normal(0, 0.01))
    lines.append(
        json.dumps(
            {
                "id": f"run-{i:03d}",
                "config": {"beta1": b1, "beta2": b2, "learning_rate": lr},
                "metrics": {"accuracy": acc, "loss": 1 - acc},
                "status": "complete",
                "created_at": "2024-06-01T12:00:00+00:00",
            }
        )
    )

# Sprinkle in the cases validation must handle:
lines.append('{"id": "run-dup", "config": {"beta1": 0.7, "beta2": 0.95, "learning_rate": 2.5}, "metrics": {"accuracy": 0.5}}')  # out of range -> warning
lines.append('{"id": "run-bad", "config": {"beta1": 0.7}, "metrics": {"accuracy": 0.5}}')  # missing params -> rejected
lines.append('{"id": "run-nan", "config": {"beta1": 0.7, "beta2": 0.95, "learning_rate": 0.1}, "metrics": {"accuracy": NaN}}')  # rejected

accepted, diagnostics = ingest_trials("\n".join(lines), space)
print(f"\naccepted {len(accepted)} trials")
for d in diagnostics:
    print(f"  line {d.line}: {d.level}: {d.message}")

dataset = Dataset(space=space, trials=tuple(accepted), version=len(accepted))
X, y, ids = design_matrix(dataset, "accuracy")
print(f"\ndesign matrix for accuracy: X {X.shape}, y {y.shape}")
print("first row:", {n: round(float(v), 5) for n, v in zip(space.param_names, X[0])},
      "->", round(float(y[0]), 5))

# Note run-dup was accepted: its learning_rate 2.5 is outside the declared
# range, but the surrogate should learn from what actually ran.
print("out-of-range trial retained:", any(t.id == "run-dup" for t in accepted))
