"""Regenerate the dashboard test fixtures from the engine's CLI.

A seeded 50-trial log is pushed through `tunelens ingest/bounds/importance
/cv --json`, so the fixtures are real canonical payloads (byte-identical
to server responses for the same inputs and seed). Run from frontend/:

    python3 scripts/generate_fixtures.py
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
SEED = 7
TREES = "25"

SPACE = {
    "params": [
        {"name": "learning_rate", "lower": 1e-6, "upper": 1.0, "display_scale": "log"},
        {"name": "dropout", "lower": 0.0, "upper": 0.5},
        {"name": "width", "kind": "discrete", "lower": 64, "upper": 1024, "step": 64},
    ],
    "metrics": [
        {"name": "score", "direction": "maximize"},
        {"name": "loss", "direction": "minimize"},
    ],
}


def make_trials() -> list[dict]:
    rng = np.random.default_rng(SEED)
    trials = []
    for i in range(50):
        lr = float(10 ** rng.uniform(-6, 0))
        dropout = float(rng.uniform(0, 0.5))
        width = float(rng.choice(np.arange(64, 1025, 64)))
        score = float(
            np.exp(-((np.log10(lr) + 2.5) ** 2) / 3) - 0.3 * dropout + 0.0001 * width
            + rng.normal(0, 0.01)
        )
        trials.append(
            {
                "id": f"run-{i:03d}",
                "config": {"learning_rate": lr, "dropout": dropout, "width": width},
                "metrics": {"score": score, "loss": float(1.0 - score)},
                "status": "complete",
                "created_at": "2024-06-01T00:00:00+00:00",
            }
        )
    return trials


def cli_json(args: list[str]) -> dict:
    out = subprocess.run(
        [sys.executable, "-m", "tunelens.cli", *args],
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout)


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    space_path = FIXTURES / "space.json"
    space_path.write_text(json.dumps(SPACE, indent=1) + "\n")

    trials = make_trials()
    trials_path = FIXTURES / "trials.jsonl"
    trials_path.write_text("\n".join(json.dumps(t) for t in trials) + "\n")
    (FIXTURES / "trials.json").write_text(json.dumps(trials, indent=1) + "\n")

    common = ["--space", str(space_path), "--trials", str(trials_path),
              "--metric", "score", "--seed", str(SEED), "--trees", TREES, "--json"]
    (FIXTURES / "bounds.json").write_text(json.dumps(cli_json(["bounds", *common])) + "\n")
    (FIXTURES / "importance.json").write_text(
        json.dumps(cli_json(["importance", *common, "--params",
                             "learning_rate,dropout,width"])) + "\n"
    )
    (FIXTURES / "modelfit.json").write_text(
        json.dumps(cli_json(["cv", *common, "--k", "5"])) + "\n"
    )
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
