import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from tunelens import ForestConfig, parse_space
from tunelens.server import ServerSettings, SessionStore, StorageCorruptError, create_app

SPACE_DOC = {
    "params": [
        {"name": "h1", "lower": 0.0, "upper": 1.0},
        {"name": "h2", "lower": 0.0, "upper": 1.0},
    ],
    "metrics": [{"name": "acc", "direction": "maximize"}],
}


def record(i, h1, h2, acc):
    return {
        "id": f"t{i}",
        "config": {"h1": h1, "h2": h2},
        "metrics": {"acc": acc},
        "status": "complete",
        "created_at": "2024-01-01T00:00:00+00:00",
    }


def random_records(n, seed=0, metric=lambda h1, h2, rng: h1):
    rng = np.random.default_rng(seed)
    recs = []
    for i in range(n):
        h1, h2 = rng.random(), rng.random()
        recs.append(record(i, float(h1), float(h2), float(metric(h1, h2, rng))))
    return recs


@pytest.fixture
def settings(tmp_path):
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(SPACE_DOC))
    return ServerSettings(
        space_path=str(space_path),
        storage_path=str(tmp_path / "trials.jsonl"),
        default_seed=7,
        guidance_min=10,
        cv_k=3,
        forest_config=ForestConfig(n_trees=5),
    )


@pytest.fixture
def client(settings):
    return TestClient(create_app(settings))


def restart(settings) -> TestClient:
    return TestClient(create_app(settings))


class TestTrialsEndpoint:
    def test_empty_log(self, client):
        assert client.get("/api/trials").json() == []
        health = client.get("/api/healthz").json()
        assert health == {"status": "ok", "version": 0}

    def test_space_endpoint(self, client):
        body = client.get("/api/space").json()
        assert parse_space(body) == parse_space(SPACE_DOC)

    def test_post_then_read_then_restart(self, settings, client):
        recs = random_records(3)
        r = client.post("/api/trials", json=recs)
        assert r.status_code == 200
        body = r.json()
        assert body["accepted"] == 3 and body["version"] == 3 and body["rejected"] == []
        assert len(client.get("/api/trials").json()) == 3

        again = restart(settings)
        assert len(again.get("/api/trials").json()) == 3
        assert again.get("/api/healthz").json()["version"] == 3

    def test_jsonl_body(self, client):
        lines = "\n".join(json.dumps(r) for r in random_records(2))
        r = client.post("/api/trials", content=lines, headers={"content-type": "text/plain"})
        assert r.json()["accepted"] == 2

    def test_partial_acceptance_and_log_purity(self, settings, client):
        recs = random_records(3)
        recs[1]["metrics"]["acc"] = float("nan")
        lines = []
        for r in recs:
            lines.append(json.dumps(r) if r is not recs[1] else json.dumps(r).replace("NaN", "NaN"))
        body = "\n".join(json.dumps(r) for r in recs).replace("nan", "NaN")
        r = client.post("/api/trials", content=body, headers={"content-type": "text/plain"})
        out = r.json()
        assert out["accepted"] == 2
        assert len(out["rejected"]) == 1 and out["rejected"][0]["line"] == 2
        assert "non-finite" in out["rejected"][0]["reason"]
        # the log holds only accepted records and replays to the same dataset
        stored = open(settings.storage_path).read().splitlines()
        assert len(stored) == 2
        assert len(restart(settings).get("/api/trials").json()) == 2

    def test_read_your_writes_and_version_monotonic(self, client):
        v_prev = client.get("/api/healthz").json()["version"]
        for batch in (random_records(2, seed=1), random_records(2, seed=2)):
            for r in batch:
                r["id"] = f"{r['id']}-{r['config']['h1']}"
            body = client.post("/api/trials", json=batch).json()
            assert body["version"] > v_prev
            v_prev = body["version"]
            ids = {t["id"] for t in client.get("/api/trials").json()}
            assert all(r["id"] in ids for r in batch)

    def test_duplicate_batch_adds_nothing(self, client):
        recs = random_records(3)
        client.post("/api/trials", json=recs)
        body = client.post("/api/trials", json=recs).json()
        assert body["accepted"] == 0
        assert body["version"] == 3
        assert len(body["rejected"]) == 3

    def test_corrupt_log_aborts_startup(self, settings, client):
        client.post("/api/trials", json=random_records(2))
        with open(settings.storage_path, "a") as fh:
            fh.write("{broken json\n")
        with pytest.raises(StorageCorruptError, match="line 3"):
            create_app(settings)


class TestGuidanceEndpoints:
    def test_below_minimum_is_unavailable(self, client):
        client.post("/api/trials", json=random_records(5))
        r = client.get("/api/bounds", params={"metric": "acc"})
        assert r.status_code == 409
        body = r.json()
        assert body["required_minimum"] == 10 and body["usable_trials"] == 5

    def test_unknown_metric_404(self, client):
        client.post("/api/trials", json=random_records(12))
        assert client.get("/api/bounds", params={"metric": "nope"}).status_code == 404

    def test_deterministic_cached_payloads(self, client):
        client.post("/api/trials", json=random_records(20))
        a = client.get("/api/bounds", params={"metric": "acc", "seed": 3})
        b = client.get("/api/bounds", params={"metric": "acc", "seed": 3})
        assert a.content == b.content
        c = client.get("/api/importance", params={"metric": "acc", "params": "h1,h2"})
        d = client.get("/api/importance", params={"metric": "acc", "params": "h1,h2"})
        assert c.content == d.content

    def test_version_bump_invalidates(self, client):
        client.post("/api/trials", json=random_records(20))
        a = client.get("/api/bounds", params={"metric": "acc", "seed": 3}).json()
        extra = random_records(30, seed=99)[20:]
        for i, r in enumerate(extra):
            r["id"] = f"x{i}"
        client.post("/api/trials", json=extra)
        b = client.get("/api/bounds", params={"metric": "acc", "seed": 3}).json()
        assert a != b  # refit at the new version (different data)

    def test_importance_sums_to_one(self, client):
        client.post("/api/trials", json=random_records(25))
        body = client.get(
            "/api/importance", params={"metric": "acc", "params": "h1,h2", "seed": 1}
        ).json()
        total = sum(e["displayed_score"] for e in body["entries"])
        assert total == pytest.approx(1.0, abs=1e-9)
        assert not body["zero_variance"]

    def test_bounds_payload_shape(self, client):
        client.post("/api/trials", json=random_records(25))
        body = client.get("/api/bounds", params={"metric": "acc", "seed": 1}).json()
        assert body["metric"] == "acc" and body["direction"] == "maximize"
        assert body["n_trees"] == 5
        assert isinstance(body["surrogate_r2"], float)
        assert [p["name"] for p in body["params"]] == ["h1", "h2"]

    def test_model_fit_payload(self, client):
        client.post("/api/trials", json=random_records(25))
        body = client.get("/api/model-fit", params={"metric": "acc", "k": 3, "seed": 1}).json()
        assert body["k"] == 3 and len(body["fold_scores"]) == 3
        assert body["n_train"] == 25
        valid = [s for s in body["fold_scores"] if s is not None]
        assert body["mean_score"] == pytest.approx(float(np.mean(valid)))

    def test_zero_variance_metric(self, client):
        recs = [record(i, float(i) / 12, 0.5, 0.9) for i in range(12)]
        client.post("/api/trials", json=recs)
        imp = client.get("/api/importance", params={"metric": "acc"}).json()
        assert imp["zero_variance"] is True
        bnd = client.get("/api/bounds", params={"metric": "acc"})
        assert bnd.status_code == 200
        assert bnd.json()["surrogate_r2"] is None


class TestSuggestEndpoint:
    def test_naive(self, client):
        r = client.post(
            "/api/suggest",
            json={"strategy": "naive", "spec": {"a": [1, 2], "b": [0.1, 0.2]}},
        )
        body = r.json()
        assert len(body["batch"]) == 4
        assert body["state"] is None
        assert body["batch"][0] == {"config": {"a": 1.0, "b": 0.1}, "round": 0}

    def test_adaptive_round_trip(self, client):
        init = client.post(
            "/api/suggest",
            json={
                "strategy": "adaptive_init",
                "spec": {"h1": {"min": 0.0, "max": 1.0, "intervals": 3}},
            },
        ).json()
        assert [b["config"]["h1"] for b in init["batch"]] == [0.0, 0.5, 1.0]
        results = [{"config": b["config"], "score": -abs(b["config"]["h1"] - 0.5)} for b in init["batch"]]
        refined = client.post(
            "/api/suggest",
            json={
                "strategy": "adaptive_refine",
                "state": init["state"],
                "results": results,
                "metric": "acc",
            },
        ).json()
        assert [b["config"]["h1"] for b in refined["batch"]] == [0.25, 0.5, 0.75]
        assert refined["state"]["round"] == 1
        assert all(b["round"] == 1 for b in refined["batch"])

    def test_unknown_strategy_400(self, client):
        assert client.post("/api/suggest", json={"strategy": "magic"}).status_code == 400


class TestCrashSafety:
    def test_acknowledged_posts_survive(self, settings):
        # each acknowledged batch is fsynced; a brand-new process replaying
        # the log sees every acknowledged trial
        client = TestClient(create_app(settings))
        for i in range(4):
            recs = [record(f"{i}-{j}", 0.1 * j, 0.5, float(j)) for j in range(3)]
            assert client.post("/api/trials", json=recs).json()["accepted"] == 3
            fresh = SessionStore(parse_space(SPACE_DOC), settings.storage_path)
            assert len(fresh.dataset.trials) == (i + 1) * 3
