"""End-to-end tour of the HTTP API the dashboard consumes.

Runs the FastAPI app in-process (no sockets needed; install the `test`
extra for httpx). The same flow works against `tunelens serve` with curl:

    tunelens serve --space space.json --storage trials.jsonl --port 8000
    curl localhost:8000/api/healthz
    curl -X POST localhost:8000/api/trials --data-binary @trials.jsonl
    curl 'localhost:8000/api/importance?metric=score&params=lr,dropout&seed=7'
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from tunelens import ForestConfig
from tunelens.server import ServerSettings, create_app

workdir = Path(tempfile.mkdtemp(prefix="tunelens-demo-"))
(workdir / "space.json").write_text(
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

settings = ServerSettings(
    space_path=str(workdir / "space.json"),
    storage_path=str(workdir / "trials.jsonl"),
    default_seed=7,
    cv_k=5,
    forest_config=ForestConfig(n_trees=25),
)
client = TestClient(create_app(settings))
print("healthz:", client.get("/api/healthz").json())

# Ingest a batch of synthetic trials (POST accepts JSON arrays or JSONL)
rng = np.random.default_rng(5)
records = []
for i in range(60):
    lr, dropout = float(rng.random()), float(rng.random())
    score = float(1 - (lr - 0.3) ** 2 - 0.2 * dropout + rng.normal(0, 0.02))
    records.append(
        {
            "id": f"run-{i:03d}",
            "config": {"lr": lr, "dropout": dropout},
            "metrics": {"score": score},
            "status": "complete",
            "created_at": "2024-06-01T00:00:00+00:00",
        }
    )
body = client.post("/api/trials", json=records).json()
print("ingested:", body["accepted"], "version:", body["version"])

importance = client.get(
    "/api/importance", params={"metric": "score", "params": "lr,dropout", "seed": 7}
).json()
print("\nimportance table:")
for e in importance["entries"]:
    print(f"  {e['params'][0]:<8} displayed={e['displayed_score']:.4f} raw={e['raw_fraction']:.4f}")

bounds = client.get("/api/bounds", params={"metric": "score", "seed": 7}).json()
print(f"\nsuggested ranges (surrogate R^2 {bounds['surrogate_r2']:.3f}):")
for p in bounds["params"]:
    print(f"  {p['name']:<8} [{p['lo']:.3f}, {p['hi']:.3f}] support {p['support']:.2f}")

fit = client.get("/api/model-fit", params={"metric": "score", "k": 5, "seed": 7}).json()
print(f"\n{fit['k']}-fold mean R^2: {fit['mean_score']:.3f}")

nxt = client.post(
    "/api/suggest",
    json={
        "strategy": "adaptive_init",
        "spec": {"lr": {"min": 0.0, "max": 1.0, "intervals": 5},
                 "dropout": {"min": 0.0, "max": 1.0, "intervals": 3}},
    },
).json()
print(f"\nnext batch: {len(nxt['batch'])} configs, round {nxt['state']['round']}")
print("first:", nxt["batch"][0])

# Durability: a fresh app over the same storage replays every trial
reborn = TestClient(create_app(settings))
print("\nafter restart:", reborn.get("/api/healthz").json())
