"""Long-running HTTP service: durable trial storage plus analysis endpoints.

Trials persist in an append-only JSONL log; every accepted batch is
fsynced before it is acknowledged, and startup replays the log (a corrupt
line aborts startup rather than serving a silently wrong dataset).
Analysis endpoints are deterministic per (dataset version, metric, seed)
and cached per version, so dashboard refreshes are stable.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Query, Request, Response
from fastapi.staticfiles import StaticFiles

from .forest import ForestConfig
from .guidance import (
    GuidanceBundle,
    GuidanceUnavailableError,
    bounds_payload,
    canonical_json,
    compute_guidance,
    importance_payload,
    model_fit_payload,
)
from .space import Dataset, Diagnostic, SpaceDef, ingest_trials, parse_space
from .suggest import AdaptiveState, GridSpec, adaptive_init, adaptive_refine, naive_grid


class StorageCorruptError(RuntimeError):
    """The on-disk trial log failed replay; refusing to start."""


@dataclass
class ServerSettings:
    space_path: str
    storage_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    default_seed: int = 0
    guidance_min: int = 10
    cv_k: int = 10
    forest_config: ForestConfig = field(default_factory=ForestConfig)
    static_dir: str | None = None


class SessionStore:
    """Current dataset snapshot + append-only log + per-version analysis cache.

    Single writer: ingestion is serialized under a lock and swaps in a new
    immutable Dataset; readers always see a complete snapshot.
    """

    def __init__(self, space: SpaceDef, storage_path: str | Path):
        self._space = space
        self._path = Path(storage_path)
        self._lock = threading.Lock()
        self._cache: dict[tuple[int, str, int, int], GuidanceBundle] = {}
        self._dataset = self._replay()

    def _replay(self) -> Dataset:
        if not self._path.exists():
            return Dataset(space=self._space)
        lines = self._path.read_text().splitlines()
        accepted, diagnostics = ingest_trials(lines, self._space)
        errors = [d for d in diagnostics if d.level == "error"]
        if errors:
            first = errors[0]
            raise StorageCorruptError(
                f"trial log {self._path}: line {first.line}: {first.message}"
            )
        return Dataset(space=self._space, trials=tuple(accepted), version=len(accepted))

    @property
    def dataset(self) -> Dataset:
        return self._dataset

    @property
    def space(self) -> SpaceDef:
        return self._space

    def ingest(self, records: str | list) -> tuple[int, list[Diagnostic], int]:
        """Validate, append accepted records durably, swap the snapshot.

        Returns (accepted count, diagnostics, new version). Only accepted
        records reach the log, and they are fsynced before return.
        """
        with self._lock:
            accepted, diagnostics = ingest_trials(
                records, self._space, existing_ids=self._dataset.ids()
            )
            if accepted:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as fh:
                    for trial in accepted:
                        fh.write(canonical_json(trial.to_record()) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
                self._dataset = self._dataset.with_trials(accepted)
                self._cache.clear()
            return len(accepted), diagnostics, self._dataset.version

    def guidance(
        self, metric: str, seed: int, k: int, config: ForestConfig, guidance_min: int
    ) -> GuidanceBundle:
        dataset = self._dataset
        key = (dataset.version, metric, seed, k)
        bundle = self._cache.get(key)
        if bundle is None:
            bundle = compute_guidance(
                dataset, metric, seed, config=config, k=k, guidance_min=guidance_min
            )
            self._cache[key] = bundle
        return bundle


def _json_response(payload: Any, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def create_app(settings: ServerSettings, store: SessionStore | None = None) -> FastAPI:
    """Build the service. A store may be injected for tests."""
    if store is None:
        space = parse_space(Path(settings.space_path).read_text())
        store = SessionStore(space, settings.storage_path)

    app = FastAPI(title="tunelens", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.settings = settings

    @app.exception_handler(GuidanceUnavailableError)
    async def _unavailable(_req: Request, exc: GuidanceUnavailableError) -> Response:
        return _json_response(exc.to_doc(), status_code=409)

    @app.exception_handler(KeyError)
    async def _unknown(_req: Request, exc: KeyError) -> Response:
        return _json_response({"error": str(exc.args[0])}, status_code=404)

    @app.exception_handler(ValueError)
    async def _invalid(_req: Request, exc: ValueError) -> Response:
        return _json_response({"error": str(exc)}, status_code=400)

    @app.get("/api/healthz")
    def healthz() -> Response:
        return _json_response({"status": "ok", "version": store.dataset.version})

    @app.get("/api/space")
    def get_space() -> Response:
        return _json_response(store.space.to_doc())

    @app.get("/api/trials")
    def get_trials() -> Response:
        return _json_response([t.to_record() for t in store.dataset.trials])

    @app.post("/api/trials")
    async def post_trials(request: Request) -> Response:
        body = (await request.body()).decode("utf-8")
        content_type = request.headers.get("content-type", "")
        records: str | list
        if "application/json" in content_type:
            try:
                parsed = json.loads(body) if body.strip() else []
            except json.JSONDecodeError as exc:
                return _json_response({"error": f"invalid JSON body: {exc.msg}"}, 400)
            if not isinstance(parsed, list):
                return _json_response({"error": "JSON body must be an array of trials"}, 400)
            records = parsed
        else:
            records = body  # JSONL
        accepted, diagnostics, version = store.ingest(records)
        return _json_response(
            {
                "accepted": accepted,
                "rejected": [
                    {"line": d.line, "reason": d.message}
                    for d in diagnostics
                    if d.level == "error"
                ],
                "warnings": [
                    {"line": d.line, "message": d.message}
                    for d in diagnostics
                    if d.level == "warning"
                ],
                "version": version,
            }
        )

    def _bundle(metric: str, seed: int | None, k: int | None) -> GuidanceBundle:
        return store.guidance(
            metric,
            settings.default_seed if seed is None else seed,
            settings.cv_k if k is None else k,
            settings.forest_config,
            settings.guidance_min,
        )

    @app.get("/api/importance")
    def importance(
        metric: str, params: str | None = None, seed: int | None = None
    ) -> Response:
        bundle = _bundle(metric, seed, None)
        selected = (
            [p for p in params.split(",") if p]
            if params
            else store.space.param_names
        )
        return _json_response(importance_payload(bundle, selected, store.dataset))

    @app.get("/api/bounds")
    def bounds(metric: str, seed: int | None = None) -> Response:
        bundle = _bundle(metric, seed, None)
        return _json_response(bounds_payload(bundle))

    @app.get("/api/model-fit")
    def model_fit(
        metric: str, k: int | None = Query(default=None, ge=2), seed: int | None = None
    ) -> Response:
        bundle = _bundle(metric, seed, k)
        return _json_response(model_fit_payload(bundle))

    @app.post("/api/suggest")
    async def suggest(request: Request) -> Response:
        doc = await request.json()
        return _json_response(suggest_payload(doc, store.space))

    if settings.static_dir and Path(settings.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="ui")

    return app


def suggest_payload(doc: Mapping[str, Any], space: SpaceDef | None) -> dict[str, Any]:
    """Dispatch a suggestion request document to the grid-search strategies."""
    strategy = doc.get("strategy")
    if strategy == "naive":
        spec = GridSpec.from_doc(doc["spec"])
        batch = naive_grid(spec)
        return {"batch": [{"config": c, "round": 0} for c in batch], "state": None}
    if strategy == "adaptive_init":
        spec = GridSpec.from_doc(doc["spec"])
        state, batch = adaptive_init(spec, space)
        return {
            "batch": [{"config": c, "round": state.round} for c in batch],
            "state": state.to_doc(),
        }
    if strategy == "adaptive_refine":
        state = AdaptiveState.from_doc(doc["state"])
        direction = doc.get("direction")
        if direction is None:
            metric = doc.get("metric")
            if metric is None or space is None:
                raise ValueError(
                    "adaptive_refine needs a direction, or a metric plus a space"
                )
            direction = space.metric(str(metric)).direction
        results = [
            ({k: float(v) for k, v in r["config"].items()}, float(r["score"]))
            for r in doc.get("results", [])
        ]
        shrink = float(doc.get("shrink", 0.5))
        new_state, batch = adaptive_refine(
            state, results, direction, shrink=shrink, space=space
        )
        return {
            "batch": [{"config": c, "round": new_state.round} for c in batch],
            "state": new_state.to_doc(),
        }
    raise ValueError(f"unknown strategy {strategy!r}")


def serve(settings: ServerSettings) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(settings)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level="info")
