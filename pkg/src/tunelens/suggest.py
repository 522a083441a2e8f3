"""Next-batch configuration generators: naive and adaptive grid search.

Naive grid search evaluates the full Cartesian product of preset value
lists. Adaptive grid search starts from per-param {min, max, intervals}
ranges and, after each batch of results, halves each dimension's span and
re-centers it on the best coordinate seen in that batch. Batches enumerate
row-major over the declared param order and are fully deterministic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .space import KIND_DISCRETE, SpaceDef

Config = dict[str, float]


@dataclass(frozen=True)
class GridRange:
    min: float
    max: float
    intervals: int

    def __post_init__(self) -> None:
        if not self.min < self.max:
            raise ValueError("min must be < max")
        if self.intervals < 2:
            raise ValueError("intervals must be >= 2")


@dataclass(frozen=True)
class GridSpec:
    """Per-param grid declaration: explicit value lists (naive) or ranges (adaptive)."""

    params: tuple[tuple[str, tuple[float, ...] | GridRange], ...]

    def __post_init__(self) -> None:
        names = [n for n, _ in self.params]
        if not names:
            raise ValueError("grid spec needs at least one param")
        if len(set(names)) != len(names):
            raise ValueError("duplicate params in grid spec")
        for name, entry in self.params:
            if isinstance(entry, tuple):
                if not entry:
                    raise ValueError(f"{name}: empty value list")
                if any(b <= a for a, b in zip(entry, entry[1:])):
                    raise ValueError(f"{name}: value list must be strictly ascending")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.params]

    @staticmethod
    def from_doc(doc: Mapping[str, Any]) -> "GridSpec":
        params: list[tuple[str, tuple[float, ...] | GridRange]] = []
        for name, entry in doc.items():
            if isinstance(entry, Mapping):
                params.append(
                    (
                        name,
                        GridRange(
                            min=float(entry["min"]),
                            max=float(entry["max"]),
                            intervals=int(entry["intervals"]),
                        ),
                    )
                )
            else:
                params.append((name, tuple(float(v) for v in entry)))
        return GridSpec(params=tuple(params))


def grid_points(min_value: float, max_value: float, intervals: int) -> list[float]:
    """``intervals`` evenly spaced values from min to max, endpoints exact."""
    if intervals < 2:
        raise ValueError("intervals must be >= 2")
    if not min_value < max_value:
        raise ValueError("min must be < max")
    step = (max_value - min_value) / (intervals - 1)
    pts = [min_value + i * step for i in range(intervals)]
    pts[-1] = max_value
    return pts


def _snap_values(name: str, values: Sequence[float], space: SpaceDef | None) -> list[float]:
    """Snap one dim's grid values to its lattice when the param is discrete."""
    if space is None or name not in space.param_names:
        return list(values)
    p = space.params[space.param_index(name)]
    if p.kind != KIND_DISCRETE:
        return list(values)
    lattice = p.lattice()
    steps = np.rint((np.asarray(values, dtype=float) - p.lower) / p.step).astype(int)
    idx = np.clip(steps, 0, len(lattice) - 1)
    return sorted({float(lattice[i]) for i in idx})


def _cartesian(names: Sequence[str], per_dim: Sequence[Sequence[float]]) -> list[Config]:
    return [
        {name: float(v) for name, v in zip(names, combo)}
        for combo in itertools.product(*per_dim)
    ]


def naive_grid(spec: GridSpec) -> list[Config]:
    """Full Cartesian product of the preset value lists, row-major."""
    per_dim = []
    for name, entry in spec.params:
        if not isinstance(entry, tuple):
            raise ValueError(f"{name}: naive grid search needs explicit value lists")
        per_dim.append(entry)
    return _cartesian(spec.names, per_dim)


@dataclass(frozen=True)
class AdaptiveState:
    """Resumable adaptive-search state: bounds narrow, round counts up."""

    original_bounds: tuple[tuple[str, float, float], ...]
    current_bounds: tuple[tuple[str, float, float], ...]
    intervals: tuple[tuple[str, int], ...]
    round: int = 0
    best_so_far: tuple[Config, float] | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "original_bounds": {n: [lo, hi] for n, lo, hi in self.original_bounds},
            "current_bounds": {n: [lo, hi] for n, lo, hi in self.current_bounds},
            "intervals": {n: k for n, k in self.intervals},
            "round": self.round,
            "best_so_far": None
            if self.best_so_far is None
            else {"config": self.best_so_far[0], "score": self.best_so_far[1]},
        }

    @staticmethod
    def from_doc(doc: Mapping[str, Any]) -> "AdaptiveState":
        best = doc.get("best_so_far")
        return AdaptiveState(
            original_bounds=tuple(
                (n, float(lo), float(hi)) for n, (lo, hi) in doc["original_bounds"].items()
            ),
            current_bounds=tuple(
                (n, float(lo), float(hi)) for n, (lo, hi) in doc["current_bounds"].items()
            ),
            intervals=tuple((n, int(k)) for n, k in doc["intervals"].items()),
            round=int(doc.get("round", 0)),
            best_so_far=None
            if best is None
            else ({k: float(v) for k, v in best["config"].items()}, float(best["score"])),
        )


def _state_batch(state: AdaptiveState, space: SpaceDef | None) -> list[Config]:
    names = [n for n, _, _ in state.current_bounds]
    intervals = dict(state.intervals)
    per_dim = [
        _snap_values(n, grid_points(lo, hi, intervals[n]), space)
        for n, lo, hi in state.current_bounds
    ]
    return _cartesian(names, per_dim)


def adaptive_init(
    spec: GridSpec, space: SpaceDef | None = None
) -> tuple[AdaptiveState, list[Config]]:
    """Round-0 state and batch over the declared initial ranges."""
    bounds = []
    intervals = []
    for name, entry in spec.params:
        if not isinstance(entry, GridRange):
            raise ValueError(f"{name}: adaptive grid search needs {{min, max, intervals}}")
        bounds.append((name, entry.min, entry.max))
        intervals.append((name, entry.intervals))
    state = AdaptiveState(
        original_bounds=tuple(bounds),
        current_bounds=tuple(bounds),
        intervals=tuple(intervals),
        round=0,
        best_so_far=None,
    )
    return state, _state_batch(state, space)


def _pick_best(
    batch: list[Config], results: Sequence[tuple[Config, float]], direction: str
) -> tuple[Config, float]:
    """Best-scoring result among those matching the batch; ties take the
    earliest batch position."""
    by_key = {tuple(sorted(c.items())): i for i, c in enumerate(batch)}
    matched = [
        (c, s, by_key[tuple(sorted(c.items()))])
        for c, s in results
        if tuple(sorted(c.items())) in by_key
    ]
    if not matched:
        raise ValueError("results cover no config from the previous batch")
    sign = 1.0 if direction == "maximize" else -1.0
    best = max(matched, key=lambda item: (sign * item[1], -item[2]))
    return best[0], best[1]


def adaptive_refine(
    state: AdaptiveState,
    results: Sequence[tuple[Config, float]],
    direction: str,
    shrink: float = 0.5,
    space: SpaceDef | None = None,
    dedup_against: Iterable[Config] = (),
) -> tuple[AdaptiveState, list[Config]]:
    """Narrow every dim around the best result and emit the next batch.

    Each dim's span shrinks by ``shrink`` and re-centers on the best
    coordinate; at the original bounds the window shifts inward instead of
    silently losing width. ``dedup_against`` optionally drops configs that
    already ran (off by default: re-evaluating grid centers is fine, but
    re-running trials costs money).
    """
    if direction not in ("maximize", "minimize"):
        raise ValueError(f"unknown direction {direction!r}")
    if not results:
        raise ValueError("results must be nonempty")
    if not 0.0 < shrink <= 1.0:
        raise ValueError("shrink must be in (0, 1]")

    prev_batch = _state_batch(state, space)
    best_config, best_score = _pick_best(prev_batch, results, direction)

    original = {n: (lo, hi) for n, lo, hi in state.original_bounds}
    new_bounds = []
    for name, cur_lo, cur_hi in state.current_bounds:
        o_lo, o_hi = original[name]
        span = (cur_hi - cur_lo) * shrink
        center = best_config[name]
        lo, hi = center - span / 2.0, center + span / 2.0
        if lo < o_lo:  # shift inward, preserving width when the range allows
            hi = min(hi + (o_lo - lo), o_hi)
            lo = o_lo
        elif hi > o_hi:
            lo = max(lo - (hi - o_hi), o_lo)
            hi = o_hi
        new_bounds.append((name, lo, hi))

    sign = 1.0 if direction == "maximize" else -1.0
    best_so_far = state.best_so_far
    if best_so_far is None or sign * best_score > sign * best_so_far[1]:
        best_so_far = (dict(best_config), best_score)

    new_state = replace(
        state,
        current_bounds=tuple(new_bounds),
        round=state.round + 1,
        best_so_far=best_so_far,
    )
    batch = _state_batch(new_state, space)
    seen = {tuple(sorted(c.items())) for c in dedup_against}
    if seen:
        batch = [c for c in batch if tuple(sorted(c.items())) not in seen]
    return new_state, batch


def batch_jsonl(batch: Sequence[Config], round_no: int) -> str:
    """One JSON line per config, ready to feed external training jobs."""
    return "\n".join(
        json.dumps({"config": c, "round": round_no}, separators=(",", ":")) for c in batch
    )
