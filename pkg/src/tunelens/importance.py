"""Variance-based hyperparameter importance from a fitted forest.

Each tree is piecewise constant on axis-aligned leaf boxes, so marginal
means and variance components over the uniform measure on the declared
space have closed forms: integrate box-by-box, no sampling. Discrete
params integrate as uniform over their step lattice; everything is done
in "measure space" (per-dim CDF-transformed coordinates) so both kinds
share one code path.

Importance of a subset of params is the classical functional-ANOVA
component: the variance of its centered marginal, with lower-order
contributions subtracted, as a fraction of the total prediction variance.
Components are computed for the tree-averaged prediction, not per tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .forest import Forest, Leaf, Split, TreeNode
from .space import KIND_DISCRETE, ParamDef, SpaceDef

_ZERO_VARIANCE_RTOL = 1e-12


@dataclass(frozen=True)
class LeafBox:
    """Axis-aligned region routed to one leaf, clipped to the declared space.

    Intervals are [lo, hi) except at the declared upper bound, where the
    box is closed (matching the "left iff value < threshold" routing).
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    value: float


def leaf_boxes(tree: TreeNode, space: SpaceDef) -> list[LeafBox]:
    """Boxes of all leaves, in pre-order. Boxes empty within the space are dropped.

    Empty boxes only arise from thresholds outside the declared range
    (out-of-range observations can put them there); the remaining boxes
    still partition the declared space. A box whose upper edge was set by
    an actual "< threshold" rule at exactly the declared upper bound is
    treated as closed anyway; the distinction only matters for a
    measure-zero sliver (one lattice point, and only on discrete dims).
    """
    lower = np.array([p.lower for p in space.params])
    upper = np.array([p.upper for p in space.params])
    out: list[LeafBox] = []

    def rec(node: TreeNode, lo: np.ndarray, hi: np.ndarray, top_open: np.ndarray) -> None:
        if isinstance(node, Leaf):
            point_at_top = (lo == hi) & (hi == upper) & ~top_open
            if np.all((lo < hi) | point_at_top):
                out.append(
                    LeafBox(
                        lo=tuple(float(v) for v in np.maximum(lo, lower)),
                        hi=tuple(float(v) for v in np.minimum(hi, upper)),
                        value=node.value,
                    )
                )
            return
        f, t = node.feature, node.threshold
        if t < hi[f] or (t == hi[f] and not top_open[f]):
            left_hi, left_open = hi.copy(), top_open.copy()
            left_hi[f], left_open[f] = t, True
            rec(node.left, lo, left_hi, left_open)
        else:  # vacuous constraint (threshold at or beyond the box edge)
            rec(node.left, lo, hi, top_open)
        if t > lo[f]:
            right_lo = lo.copy()
            right_lo[f] = t
            rec(node.right, right_lo, hi, top_open)
        else:
            rec(node.right, lo, hi, top_open)

    rec(tree, lower.copy(), upper.copy(), np.zeros(len(space.params), dtype=bool))
    return out


def _measure_below(p: ParamDef, v: float) -> float:
    """Fraction of the param's uniform measure strictly below v."""
    if v <= p.lower:
        return 0.0
    if v >= p.upper:
        return 1.0
    if p.kind != KIND_DISCRETE:
        return (v - p.lower) / (p.upper - p.lower)
    m = p.n_lattice
    kf = (v - p.lower) / p.step
    k = round(kf)
    count = k if abs(kf - k) <= 1e-9 * max(1.0, abs(kf)) else int(np.ceil(kf))
    return min(max(count, 0), m) / m


def _box_measures(p: ParamDef, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Measure-space endpoints of per-leaf intervals on one dim (top closed)."""
    flo = np.array([_measure_below(p, v) for v in lo])
    fhi = np.array([1.0 if v >= p.upper else _measure_below(p, v) for v in hi])
    return flo, fhi


@dataclass
class _Geometry:
    """Forest leaf boxes on the shared per-dim split grids, in measure space."""

    n_trees: int
    boundaries: list[np.ndarray]  # raw cell boundaries per dim: lower, splits..., upper
    cell_w: list[np.ndarray]  # per-dim cell measure weights (each sums to 1)
    # Flat arrays over all leaves of all trees:
    a: np.ndarray  # (L, d) first covered cell per dim
    b: np.ndarray  # (L, d) one-past-last covered cell per dim
    q: np.ndarray  # (L, d) leaf interval measure per dim
    flo: np.ndarray  # (L, d) measure-space lo
    fhi: np.ndarray  # (L, d) measure-space hi
    vals: np.ndarray  # (L,)

    def leave_one_out(self, dims: Sequence[int]) -> np.ndarray:
        """Per-leaf product of interval measures over dims NOT in ``dims``."""
        mask = np.ones(self.q.shape[1], dtype=bool)
        mask[list(dims)] = False
        return self.q[:, mask].prod(axis=1)


def _collect_thresholds(tree: TreeNode, per_dim: list[list[float]]) -> None:
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Split):
            per_dim[node.feature].append(node.threshold)
            stack.append(node.left)
            stack.append(node.right)


def _build_geometry(forest: Forest, space: SpaceDef) -> _Geometry:
    d = len(space.params)
    per_dim: list[list[float]] = [[] for _ in range(d)]
    for tree in forest.trees:
        _collect_thresholds(tree, per_dim)

    boundaries = []
    cell_w = []
    for i, p in enumerate(space.params):
        inner = sorted({t for t in per_dim[i] if p.lower < t < p.upper})
        bnd = np.array([p.lower, *inner, p.upper])
        fb = np.array([_measure_below(p, v) for v in bnd])
        fb[-1] = 1.0
        boundaries.append(bnd)
        cell_w.append(np.diff(fb))

    a_list, b_list, q_list, flo_list, fhi_list, vals = [], [], [], [], [], []
    for tree in forest.trees:
        boxes = leaf_boxes(tree, space)
        lo = np.array([bx.lo for bx in boxes])
        hi = np.array([bx.hi for bx in boxes])
        vals.extend(bx.value for bx in boxes)
        a = np.empty((len(boxes), d), dtype=int)
        b = np.empty((len(boxes), d), dtype=int)
        flo = np.empty((len(boxes), d))
        fhi = np.empty((len(boxes), d))
        for i, p in enumerate(space.params):
            a[:, i] = np.searchsorted(boundaries[i], lo[:, i], side="left")
            b[:, i] = np.searchsorted(boundaries[i], hi[:, i], side="left")
            flo[:, i], fhi[:, i] = _box_measures(p, lo[:, i], hi[:, i])
        a_list.append(a)
        b_list.append(b)
        q_list.append(fhi - flo)
        flo_list.append(flo)
        fhi_list.append(fhi)

    return _Geometry(
        n_trees=len(forest.trees),
        boundaries=boundaries,
        cell_w=cell_w,
        a=np.concatenate(a_list),
        b=np.concatenate(b_list),
        q=np.concatenate(q_list),
        flo=np.concatenate(flo_list),
        fhi=np.concatenate(fhi_list),
        vals=np.array(vals),
    )


def _check_space(forest: Forest, space: SpaceDef) -> None:
    if forest.space_fingerprint != space.fingerprint():
        raise ValueError("forest was fitted over a different space (fingerprint mismatch)")


def _grand_mean(geo: _Geometry) -> float:
    return float(geo.vals @ geo.q.prod(axis=1)) / geo.n_trees


def _marginal_grid(geo: _Geometry, dims: Sequence[int], values: np.ndarray) -> np.ndarray:
    """Marginal of the tree-averaged function on the product grid of ``dims``.

    ``values`` are per-leaf heights (already centered, if desired). Uses a
    multidimensional difference array: each leaf adds its weight on a box
    of cells via signed corner updates, then cumulative sums restore the
    dense grid in O(grid size).
    """
    shape = tuple(len(geo.cell_w[i]) + 1 for i in dims)
    grid = np.zeros(shape)
    base = values * geo.leave_one_out(dims)
    for signs in itertools.product((0, 1), repeat=len(dims)):
        idx = tuple(
            geo.a[:, dim] if s == 0 else geo.b[:, dim] for s, dim in zip(signs, dims)
        )
        sign = -1.0 if sum(signs) % 2 else 1.0
        np.add.at(grid, idx, sign * base)
    for ax in range(len(dims)):
        grid = np.cumsum(grid, axis=ax)
    grid = grid[tuple(slice(0, n - 1) for n in shape)]
    return grid / geo.n_trees


def _weighted_square_sum(grid: np.ndarray, dims: Sequence[int], geo: _Geometry) -> float:
    t = grid * grid
    for i in dims:
        t = np.tensordot(t, geo.cell_w[i], axes=(0, 0))
    return float(t)


def _total_variance(geo: _Geometry, mu: float, chunk: int = 256) -> float:
    """Exact variance of the tree-averaged prediction.

    Expands E[(f - mu)^2] over all cross-tree leaf-box intersections;
    intersections are computed in measure space so continuous and lattice
    dims weigh correctly.
    """
    centered = geo.vals - mu
    n = centered.size
    acc = 0.0
    for s in range(0, n, chunk):
        lo = np.maximum(geo.flo[s : s + chunk, None, :], geo.flo[None, :, :])
        hi = np.minimum(geo.fhi[s : s + chunk, None, :], geo.fhi[None, :, :])
        vol = np.clip(hi - lo, 0.0, None).prod(axis=2)
        acc += float(centered[s : s + chunk] @ vol @ centered)
    return max(acc / geo.n_trees**2, 0.0)


def marginal_mean(
    forest: Forest, space: SpaceDef, subset: Sequence[str], point: Sequence[float]
) -> float:
    """Expected prediction at ``point`` on the ``subset`` dims, all other
    dims integrated out under the uniform measure on the declared space."""
    _check_space(forest, space)
    if not subset:
        raise ValueError("subset must be nonempty")
    dims = [space.param_index(name) for name in subset]
    if len(set(dims)) != len(dims):
        raise ValueError("subset has repeated params")
    point = np.asarray(point, dtype=float)
    if point.shape != (len(dims),):
        raise ValueError("point must give one value per subset dim")
    for name, i, v in zip(subset, dims, point):
        p = space.params[i]
        if not p.contains(v):
            raise ValueError(f"{name}={v} outside declared range [{p.lower}, {p.upper}]")

    geo = _build_geometry(forest, space)
    contained = np.ones(geo.vals.size, dtype=bool)
    for i, v in zip(dims, point):
        bnd = geo.boundaries[i]
        lo_raw = bnd[geo.a[:, i]]
        hi_raw = bnd[geo.b[:, i]]
        at_top = geo.b[:, i] == len(geo.cell_w[i])  # box closed at the declared upper
        contained &= (lo_raw <= v) & ((v < hi_raw) | at_top)
    weights = geo.leave_one_out(dims)
    return float(geo.vals[contained] @ weights[contained]) / geo.n_trees


@dataclass(frozen=True)
class Decomposition:
    """Raw variance fractions per param subset, plus the total variance."""

    fractions: dict[tuple[str, ...], float]
    total_variance: float
    zero_variance: bool


def variance_decomposition(
    forest: Forest, space: SpaceDef, max_order: int = 1
) -> Decomposition:
    """Exact variance fractions for all param subsets up to ``max_order``.

    Orders 1 (singletons) and 2 (pairs) are the supported reporting
    surface; higher orders are permitted on small spaces, where the full
    decomposition identity (fractions sum to 1) can be checked directly.
    A constant surrogate yields the zero_variance flag and all-zero
    fractions rather than NaNs.
    """
    _check_space(forest, space)
    d = len(space.params)
    if not 1 <= max_order <= d:
        raise ValueError(f"max_order must be in [1, {d}]")

    geo = _build_geometry(forest, space)
    mu = _grand_mean(geo)
    total = _total_variance(geo, mu)

    names = space.param_names
    scale = max(1.0, float(np.max(np.abs(geo.vals))) ** 2) if geo.vals.size else 1.0
    if total <= _ZERO_VARIANCE_RTOL * scale:
        fractions = {}
        for order in range(1, max_order + 1):
            for dims in itertools.combinations(range(d), order):
                fractions[tuple(names[i] for i in dims)] = 0.0
        return Decomposition(fractions=fractions, total_variance=0.0, zero_variance=True)

    centered = geo.vals - mu
    components: dict[tuple[int, ...], float] = {}
    for order in range(1, max_order + 1):
        for dims in itertools.combinations(range(d), order):
            grid = _marginal_grid(geo, dims, centered)
            v = _weighted_square_sum(grid, dims, geo)
            for sub_order in range(1, order):
                for sub in itertools.combinations(dims, sub_order):
                    v -= components[sub]
            components[dims] = max(v, 0.0)

    fractions = {
        tuple(names[i] for i in dims): min(v / total, 1.0)
        for dims, v in components.items()
    }
    return Decomposition(fractions=fractions, total_variance=total, zero_variance=False)


@dataclass(frozen=True)
class ImportanceReport:
    """Importance scores for the params selected in the UI.

    displayed_score renormalizes the raw fractions over the selected set so
    the shown table sums to 1; raw_fraction keeps the unnormalized share of
    total prediction variance.
    """

    metric: str
    total_variance: float
    zero_variance: bool
    entries: tuple[tuple[tuple[str, ...], float, float], ...]  # (params, raw, displayed)

    def to_doc(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "total_variance": self.total_variance,
            "entries": [
                {
                    "params": list(params),
                    "raw_fraction": raw,
                    "displayed_score": shown,
                }
                for params, raw, shown in self.entries
            ],
            "zero_variance": self.zero_variance,
        }


def selection_report(
    decomposition: Decomposition,
    space: SpaceDef,
    selected: Sequence[str],
    metric: str,
) -> ImportanceReport:
    """Build the selection-renormalized report from an order-1 decomposition."""
    if not selected:
        raise ValueError("empty selection")
    if len(set(selected)) != len(selected):
        raise ValueError("selection has repeated params")
    for name in selected:
        space.param_index(name)  # raises KeyError on unknown names

    raw = {params[0]: frac for params, frac in decomposition.fractions.items()}
    ordered = [n for n in space.param_names if n in set(selected)]

    entries: list[tuple[tuple[str, ...], float, float]] = []
    if decomposition.zero_variance:
        entries = [((n,), 0.0, 0.0) for n in ordered]
    else:
        selected_sum = sum(raw[n] for n in ordered)
        for n in ordered:
            if selected_sum > 0.0:
                shown = raw[n] / selected_sum
            else:
                shown = 1.0 / len(ordered)  # no split ever used these dims
            entries.append(((n,), raw[n], shown))

    return ImportanceReport(
        metric=metric,
        total_variance=decomposition.total_variance,
        zero_variance=decomposition.zero_variance,
        entries=tuple(entries),
    )


def importance_report(
    forest: Forest,
    space: SpaceDef,
    selected: Sequence[str],
    metric: str | None = None,
) -> ImportanceReport:
    """Score the selected params (singletons), renormalized to sum to 1."""
    decomp = variance_decomposition(forest, space, max_order=1)
    return selection_report(decomp, space, selected, metric or forest.target_metric)
