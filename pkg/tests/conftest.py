import json

import numpy as np
import pytest

from tunelens import Dataset, SpaceDef, Trial, parse_space


@pytest.fixture
def space_1d() -> SpaceDef:
    return parse_space(
        {
            "params": [{"name": "h1", "lower": 0.0, "upper": 1.0}],
            "metrics": [{"name": "acc", "direction": "maximize"}],
        }
    )


@pytest.fixture
def space_2d() -> SpaceDef:
    return parse_space(
        {
            "params": [
                {"name": "h1", "lower": 0.0, "upper": 1.0},
                {"name": "h2", "lower": 0.0, "upper": 1.0},
            ],
            "metrics": [{"name": "acc", "direction": "maximize"}],
        }
    )


@pytest.fixture
def ic_space() -> SpaceDef:
    """The 3-param image-classification style space."""
    return parse_space(
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


def make_dataset(space: SpaceDef, X, y, metric: str | None = None) -> Dataset:
    """Dataset from arrays, trial per row, ids t0, t1, ..."""
    metric = metric or space.metric_names[0]
    names = space.param_names
    trials = tuple(
        Trial(
            id=f"t{i}",
            config={n: float(v) for n, v in zip(names, row)},
            metrics={metric: float(target)},
            status="complete",
            created_at="2024-01-01T00:00:00+00:00",
        )
        for i, (row, target) in enumerate(zip(np.atleast_2d(X), y))
    )
    return Dataset(space=space, trials=trials, version=len(trials))


def trial_lines(trials) -> str:
    return "\n".join(json.dumps(t.to_record()) for t in trials)
