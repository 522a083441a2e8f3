"""Hyperparameter space schema and trial-log ingestion.

A space declares the tunable parameters (all numeric, continuous or
discrete-with-step) and the performance metrics with their optimization
direction. Trials are observed (configuration, metrics) records ingested
from JSON lines; validation is strict about schema and finiteness but
deliberately keeps out-of-range observations (they really ran).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Iterable, Mapping

import numpy as np

KIND_CONTINUOUS = "continuous"
KIND_DISCRETE = "discrete"
STATUS_COMPLETE = "complete"
STATUS_EARLY_STOPPED = "early_stopped"

_STEP_MULTIPLE_RTOL = 1e-9


class SchemaError(ValueError):
    """A space or trial document violates its schema."""


class InsufficientTrialsError(ValueError):
    """Too few usable trials for the requested operation."""


@dataclass(frozen=True)
class ParamDef:
    """One tunable hyperparameter: numeric range, optionally on a step lattice."""

    name: str
    kind: str = KIND_CONTINUOUS
    lower: float = 0.0
    upper: float = 1.0
    step: float | None = None
    display_scale: str = "linear"  # presentation hint only; never affects math

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise SchemaError("param name must be a nonempty string")
        if self.kind not in (KIND_CONTINUOUS, KIND_DISCRETE):
            raise SchemaError(f"param {self.name!r}: unknown kind {self.kind!r}")
        if self.display_scale not in ("linear", "log"):
            raise SchemaError(
                f"param {self.name!r}: unknown display_scale {self.display_scale!r}"
            )
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise SchemaError(f"param {self.name!r}: bounds must be finite")
        if not self.lower < self.upper:
            raise SchemaError(f"param {self.name!r}: inverted or empty bounds")
        if self.kind == KIND_DISCRETE:
            if self.step is None or not (self.step > 0):
                raise SchemaError(f"param {self.name!r}: discrete params need step > 0")
            span = (self.upper - self.lower) / self.step
            if abs(span - round(span)) > _STEP_MULTIPLE_RTOL * max(1.0, abs(span)):
                raise SchemaError(
                    f"param {self.name!r}: (upper - lower) is not a multiple of step"
                )
        elif self.step is not None:
            raise SchemaError(f"param {self.name!r}: step is only valid for discrete params")

    @property
    def n_lattice(self) -> int:
        """Number of lattice points for a discrete param."""
        assert self.kind == KIND_DISCRETE and self.step is not None
        return int(round((self.upper - self.lower) / self.step)) + 1

    def lattice(self) -> np.ndarray:
        """The value lattice lower, lower+step, ..., upper of a discrete param."""
        m = self.n_lattice
        pts = self.lower + self.step * np.arange(m)
        pts[-1] = self.upper
        return pts

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "name": self.name,
            "kind": self.kind,
            "lower": self.lower,
            "upper": self.upper,
        }
        if self.step is not None:
            doc["step"] = self.step
        if self.display_scale != "linear":
            doc["display_scale"] = self.display_scale
        return doc


@dataclass(frozen=True)
class MetricDef:
    """A performance metric and the direction that counts as better."""

    name: str
    direction: str

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise SchemaError("metric name must be a nonempty string")
        if self.direction not in ("maximize", "minimize"):
            raise SchemaError(
                f"metric {self.name!r}: direction must be 'maximize' or 'minimize'"
            )

    def to_doc(self) -> dict[str, Any]:
        return {"name": self.name, "direction": self.direction}


@dataclass(frozen=True)
class SpaceDef:
    """Ordered parameter and metric declarations.

    Parameter order here is the canonical feature order for every design
    matrix, forest, and report downstream.
    """

    params: tuple[ParamDef, ...]
    metrics: tuple[MetricDef, ...]

    def __post_init__(self) -> None:
        if not self.params:
            raise SchemaError("space needs at least one param")
        if not self.metrics:
            raise SchemaError("space needs at least one metric")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate param names")
        mnames = [m.name for m in self.metrics]
        if len(set(mnames)) != len(mnames):
            raise SchemaError("duplicate metric names")

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def metric_names(self) -> list[str]:
        return [m.name for m in self.metrics]

    def param_index(self, name: str) -> int:
        for i, p in enumerate(self.params):
            if p.name == name:
                return i
        raise KeyError(f"unknown param {name!r}")

    def metric(self, name: str) -> MetricDef:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(f"unknown metric {name!r}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "params": [p.to_doc() for p in self.params],
            "metrics": [m.to_doc() for m in self.metrics],
        }

    def fingerprint(self) -> str:
        """Stable hash of the declaration, used to pin fitted models to a space."""
        blob = json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_space(document: str | Mapping[str, Any]) -> SpaceDef:
    """Parse and validate a space document (JSON text or an already-parsed mapping)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"space document is not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise SchemaError("space document must be a JSON object")
    params_doc = document.get("params")
    metrics_doc = document.get("metrics")
    if not isinstance(params_doc, list):
        raise SchemaError("params: must be a list")
    if not isinstance(metrics_doc, list):
        raise SchemaError("metrics: must be a list")

    params = []
    for i, pd in enumerate(params_doc):
        where = f"params[{i}]"
        if not isinstance(pd, Mapping):
            raise SchemaError(f"{where}: must be an object")
        unknown = set(pd) - {"name", "kind", "lower", "upper", "step", "display_scale"}
        if unknown:
            raise SchemaError(f"{where}: unknown fields {sorted(unknown)}")
        for req in ("name", "lower", "upper"):
            if req not in pd:
                raise SchemaError(f"{where}.{req}: missing")
        for numf in ("lower", "upper", "step"):
            if numf in pd and pd[numf] is not None and not isinstance(pd[numf], (int, float)):
                raise SchemaError(f"{where}.{numf}: must be a number")
        try:
            params.append(
                ParamDef(
                    name=pd["name"],
                    kind=pd.get("kind", KIND_CONTINUOUS),
                    lower=float(pd["lower"]),
                    upper=float(pd["upper"]),
                    step=float(pd["step"]) if pd.get("step") is not None else None,
                    display_scale=pd.get("display_scale", "linear"),
                )
            )
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None

    metrics = []
    for i, md in enumerate(metrics_doc):
        where = f"metrics[{i}]"
        if not isinstance(md, Mapping):
            raise SchemaError(f"{where}: must be an object")
        unknown = set(md) - {"name", "direction"}
        if unknown:
            raise SchemaError(f"{where}: unknown fields {sorted(unknown)}")
        for req in ("name", "direction"):
            if req not in md:
                raise SchemaError(f"{where}.{req}: missing")
        try:
            metrics.append(MetricDef(name=md["name"], direction=md["direction"]))
        except SchemaError as exc:
            raise SchemaError(f"{where}: {exc}") from None

    return SpaceDef(params=tuple(params), metrics=tuple(metrics))


@dataclass(frozen=True)
class Trial:
    """One observed training run: a full configuration plus its measured metrics."""

    id: str
    config: dict[str, float]
    metrics: dict[str, float]
    status: str = STATUS_COMPLETE
    created_at: str = ""

    def to_record(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "config": dict(self.config),
            "metrics": dict(self.metrics),
            "status": self.status,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class Diagnostic:
    """One ingestion finding. Errors rejected the record; warnings did not."""

    level: str  # "error" | "warning"
    message: str
    line: int | None = None

    def to_doc(self) -> dict[str, Any]:
        return {"line": self.line, "level": self.level, "message": self.message}


@dataclass(frozen=True)
class Dataset:
    """Immutable snapshot of a space plus its ingested trials.

    version == len(trials): it bumps on every accepting ingestion and is
    reproduced exactly when the trial log is replayed from empty.
    """

    space: SpaceDef
    trials: tuple[Trial, ...] = ()
    version: int = 0

    def __post_init__(self) -> None:
        ids = [t.id for t in self.trials]
        if len(set(ids)) != len(ids):
            raise SchemaError("duplicate trial ids in dataset")

    def ids(self) -> set[str]:
        return {t.id for t in self.trials}

    def with_trials(self, new: Iterable[Trial]) -> "Dataset":
        trials = self.trials + tuple(new)
        return Dataset(space=self.space, trials=trials, version=len(trials))

    def to_doc(self) -> dict[str, Any]:
        return {
            "space": self.space.to_doc(),
            "trials": [t.to_record() for t in self.trials],
            "version": self.version,
        }

    @staticmethod
    def from_doc(doc: Mapping[str, Any]) -> "Dataset":
        space = parse_space(doc["space"])
        accepted, diagnostics = ingest_trials(doc.get("trials", []), space)
        errors = [d for d in diagnostics if d.level == "error"]
        if errors:
            raise SchemaError(f"dataset document invalid: {errors[0].message}")
        return Dataset(space=space, trials=tuple(accepted), version=int(doc.get("version", len(accepted))))


def _validate_created_at(value: Any) -> str:
    if value in (None, ""):
        return ""
    if not isinstance(value, str):
        raise SchemaError("created_at: must be an ISO-8601 string")
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise SchemaError(f"created_at: not ISO-8601: {value!r}") from None
    return value


def _coerce_record(obj: Any) -> dict[str, Any]:
    if not isinstance(obj, Mapping):
        raise SchemaError("record must be a JSON object")
    unknown = set(obj) - {"id", "config", "metrics", "status", "created_at"}
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}")
    if "id" not in obj:
        raise SchemaError("id: missing")
    if not isinstance(obj["id"], (str, int)):
        raise SchemaError("id: must be a string")
    if "config" not in obj or not isinstance(obj["config"], Mapping):
        raise SchemaError("config: missing or not an object")
    metrics = obj.get("metrics", {})
    if not isinstance(metrics, Mapping):
        raise SchemaError("metrics: must be an object")
    return {
        "id": str(obj["id"]),
        "config": obj["config"],
        "metrics": metrics,
        "status": obj.get("status"),
        "created_at": obj.get("created_at"),
    }


def ingest_trials(
    records: str | Iterable[str | Mapping[str, Any]],
    space: SpaceDef,
    existing_ids: Iterable[str] = (),
) -> tuple[list[Trial], list[Diagnostic]]:
    """Validate a batch of trial records against a space.

    ``records`` is JSONL text, an iterable of JSONL lines, or an iterable of
    already-parsed objects. Returns accepted trials (ingestion order
    preserved) and diagnostics with 1-based line numbers.

    Policy: malformed records, duplicate ids, unknown names, and non-finite
    values are errors (record rejected); out-of-range configurations are
    accepted with a warning; a record claiming completion while missing a
    declared metric is kept but downgraded to early_stopped.
    """
    if isinstance(records, str):
        records = records.splitlines()

    seen: set[str] = set(existing_ids)
    accepted: list[Trial] = []
    diagnostics: list[Diagnostic] = []

    def err(line: int, message: str) -> None:
        diagnostics.append(Diagnostic(level="error", message=message, line=line))

    def warn(line: int, message: str) -> None:
        diagnostics.append(Diagnostic(level="warning", message=message, line=line))

    for line_no, raw in enumerate(records, start=1):
        if isinstance(raw, str):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                err(line_no, f"malformed record: {exc.msg}")
                continue
        else:
            obj = raw
        try:
            rec = _coerce_record(obj)
        except SchemaError as exc:
            err(line_no, str(exc))
            continue

        if rec["id"] in seen:
            err(line_no, f"duplicate trial id {rec['id']!r}")
            continue

        config: dict[str, float] = {}
        bad = False
        for p in space.params:
            if p.name not in rec["config"]:
                err(line_no, f"config missing param {p.name!r}")
                bad = True
                break
            v = rec["config"][p.name]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                err(line_no, f"config.{p.name}: non-finite or non-numeric value")
                bad = True
                break
            config[p.name] = float(v)
        if bad:
            continue
        extra = set(rec["config"]) - set(space.param_names)
        if extra:
            err(line_no, f"config has unknown params {sorted(extra)}")
            continue

        metrics: dict[str, float] = {}
        for mname, mv in rec["metrics"].items():
            if mname not in space.metric_names:
                err(line_no, f"metrics has unknown metric {mname!r}")
                bad = True
                break
            if not isinstance(mv, (int, float)) or isinstance(mv, bool) or not math.isfinite(mv):
                err(line_no, f"metrics.{mname}: non-finite metric value")
                bad = True
                break
            metrics[mname] = float(mv)
        if bad:
            continue

        status = rec["status"]
        missing_metrics = [m for m in space.metric_names if m not in metrics]
        if status is None:
            status = STATUS_COMPLETE if not missing_metrics else STATUS_EARLY_STOPPED
        elif status not in (STATUS_COMPLETE, STATUS_EARLY_STOPPED):
            err(line_no, f"status: unknown value {status!r}")
            continue
        if status == STATUS_COMPLETE and missing_metrics:
            warn(
                line_no,
                f"trial {rec['id']!r} missing metrics {missing_metrics}; kept as early_stopped",
            )
            status = STATUS_EARLY_STOPPED

        try:
            created_at = _validate_created_at(rec["created_at"])
        except SchemaError as exc:
            err(line_no, str(exc))
            continue

        for p in space.params:
            if not p.contains(config[p.name]):
                warn(
                    line_no,
                    f"trial {rec['id']!r}: {p.name}={config[p.name]!r} outside declared "
                    f"range [{p.lower}, {p.upper}]",
                )

        seen.add(rec["id"])
        accepted.append(
            Trial(
                id=rec["id"],
                config=config,
                metrics=metrics,
                status=status,
                created_at=created_at,
            )
        )

    return accepted, diagnostics


def design_matrix(
    dataset: Dataset,
    metric: str,
    include_early_stopped: bool = False,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Assemble the (X, y, ids) regression data for one metric.

    Rows follow ingestion order; columns follow the canonical param order.
    Values are raw (no normalization): axis-aligned tree splits are
    scale-invariant, and raw values keep extracted bounds readable.
    Only trials carrying the metric are eligible; early-stopped trials are
    excluded unless ``include_early_stopped`` lifts the status filter.
    """
    if metric not in dataset.space.metric_names:
        raise KeyError(f"unknown metric {metric!r}")
    rows = [
        t
        for t in dataset.trials
        if metric in t.metrics and (include_early_stopped or t.status == STATUS_COMPLETE)
    ]
    if len(rows) < 2:
        raise InsufficientTrialsError(
            f"insufficient trials: {len(rows)} usable for metric {metric!r} (need >= 2)"
        )
    names = dataset.space.param_names
    X = np.array([[t.config[n] for n in names] for t in rows], dtype=float)
    y = np.array([t.metrics[metric] for t in rows], dtype=float)
    return X, y, [t.id for t in rows]
