"""Suggested hyperparameter ranges from best-leaf paths.

For each tree: pick the leaf with the best predicted value, walk its
root-to-leaf path, and intersect the split rules into one closed interval
per param. Across trees: intersect per dimension when the trees agree;
otherwise fall back to the interval covered by the most trees (endpoint
sweep) and surface that coverage as a support fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .forest import Forest, Leaf, TreeNode
from .space import KIND_DISCRETE, ParamDef, SpaceDef


@dataclass(frozen=True)
class PathRule:
    """One split decision along a path: feature < threshold or feature >= threshold."""

    feature: int
    relation: str  # "lt" | "ge"
    threshold: float


@dataclass(frozen=True)
class LeafRef:
    """A leaf plus its pre-order position within its tree."""

    index: int
    leaf: Leaf


@dataclass(frozen=True)
class TreeBounds:
    """Per-param closed intervals implied by one tree's best-leaf path."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    leaf_value: float
    leaf_count: int


def _leaf_paths(tree: TreeNode) -> list[tuple[LeafRef, tuple[PathRule, ...]]]:
    """All leaves in pre-order with the rules that route to them."""
    out: list[tuple[LeafRef, tuple[PathRule, ...]]] = []
    stack: list[tuple[TreeNode, tuple[PathRule, ...]]] = [(tree, ())]
    while stack:
        node, rules = stack.pop()
        if isinstance(node, Leaf):
            out.append((LeafRef(index=len(out), leaf=node), rules))
            continue
        lt = PathRule(feature=node.feature, relation="lt", threshold=node.threshold)
        ge = PathRule(feature=node.feature, relation="ge", threshold=node.threshold)
        stack.append((node.right, rules + (ge,)))
        stack.append((node.left, rules + (lt,)))
    return out


def _better(a: tuple[float, int, int], b: tuple[float, int, int], direction: str) -> bool:
    """Is leaf a (value, count, preorder) better than b? Ties: larger count, then
    earlier pre-order position."""
    av, ac, ai = a
    bv, bc, bi = b
    if av != bv:
        return av > bv if direction == "maximize" else av < bv
    if ac != bc:
        return ac > bc
    return ai < bi


def best_leaf(tree: TreeNode, direction: str) -> LeafRef:
    """The leaf with the best value for the metric direction."""
    if direction not in ("maximize", "minimize"):
        raise ValueError(f"unknown direction {direction!r}")
    best: LeafRef | None = None
    for ref, _rules in _leaf_paths(tree):
        if best is None or _better(
            (ref.leaf.value, ref.leaf.count, ref.index),
            (best.leaf.value, best.leaf.count, best.index),
            direction,
        ):
            best = ref
    assert best is not None
    return best


def path_bounds(tree: TreeNode, leaf: LeafRef, space: SpaceDef) -> TreeBounds:
    """Intersect the rules on the path to ``leaf`` into per-param intervals.

    Rules with thresholds outside a param's declared range are dropped
    (they are either vacuous inside the space or would clip it empty);
    dims the path never constrains keep the full declared range.
    """
    for ref, rules in _leaf_paths(tree):
        if ref.index == leaf.index:
            break
    else:
        raise ValueError("leaf does not belong to this tree")

    lo = np.array([p.lower for p in space.params])
    hi = np.array([p.upper for p in space.params])
    for rule in rules:
        p = space.params[rule.feature]
        if not p.lower < rule.threshold < p.upper:
            continue
        if rule.relation == "lt":
            hi[rule.feature] = min(hi[rule.feature], rule.threshold)
        else:
            lo[rule.feature] = max(lo[rule.feature], rule.threshold)
    return TreeBounds(
        lo=tuple(lo), hi=tuple(hi), leaf_value=ref.leaf.value, leaf_count=ref.leaf.count
    )


def _snap_outward(p: ParamDef, lo: float, hi: float) -> tuple[float, float]:
    """Widen a discrete param's interval to the enclosing lattice points."""
    if p.kind != KIND_DISCRETE:
        return lo, hi
    lattice = p.lattice()
    lo_idx = max(int(np.searchsorted(lattice, lo, side="right")) - 1, 0)
    hi_idx = min(int(np.searchsorted(lattice, hi, side="left")), len(lattice) - 1)
    return float(lattice[lo_idx]), float(lattice[hi_idx])


def _sweep_interval(
    los: np.ndarray, his: np.ndarray, leaf_values: np.ndarray
) -> tuple[float, float, int]:
    """Interval covered by the most per-tree intervals, by endpoint sweep.

    Candidates are maximal runs of elementary pieces (endpoints and the open
    gaps between them) at the maximum coverage. Ties prefer the candidate
    whose covering trees have the highest mean leaf value, then the widest,
    then the leftmost. Returns (lo, hi, covering_count).
    """
    endpoints = np.unique(np.concatenate([los, his]))
    pieces: list[tuple[float, float]] = []  # closed [a, b]; points have a == b
    for k, e in enumerate(endpoints):
        pieces.append((float(e), float(e)))
        if k + 1 < len(endpoints):
            pieces.append((float(e), float(endpoints[k + 1])))

    def coverage(a: float, b: float) -> np.ndarray:
        return (los <= a) & (b <= his)

    counts = [int(coverage(a, b).sum()) for a, b in pieces]
    best_count = max(counts)

    candidates: list[tuple[float, float]] = []
    run_start: int | None = None
    for k, c in enumerate(counts):
        if c == best_count and run_start is None:
            run_start = k
        if (c != best_count or k == len(counts) - 1) and run_start is not None:
            last = k if c == best_count else k - 1
            candidates.append((pieces[run_start][0], pieces[last][1]))
            run_start = None

    def rank(cand: tuple[float, float]) -> tuple[float, float, float]:
        covering = coverage(cand[0], cand[1])
        mean_value = float(leaf_values[covering].mean()) if covering.any() else -np.inf
        return (mean_value, cand[1] - cand[0], -cand[0])

    best = max(candidates, key=rank)
    return best[0], best[1], int(coverage(best[0], best[1]).sum())


@dataclass(frozen=True)
class BoundsReport:
    """Suggested per-param intervals with per-tree support and fit quality."""

    metric: str
    direction: str
    n_trees: int
    surrogate_r2: float | None
    params: tuple[tuple[str, float, float, float], ...]  # (name, lo, hi, support)

    def to_doc(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "direction": self.direction,
            "n_trees": self.n_trees,
            "surrogate_r2": self.surrogate_r2,
            "params": [
                {"name": name, "lo": lo, "hi": hi, "support": support}
                for name, lo, hi, support in self.params
            ],
        }


def tree_bounds(forest: Forest, space: SpaceDef) -> list[TreeBounds]:
    """Best-leaf path intervals for every tree, in tree order."""
    out = []
    for tree in forest.trees:
        leaf = best_leaf(tree, forest.direction)
        out.append(path_bounds(tree, leaf, space))
    return out


def aggregate_bounds(
    forest: Forest, space: SpaceDef, surrogate_r2: float | None = None
) -> BoundsReport:
    """Combine per-tree best-leaf intervals into one suggested range per param.

    Per dimension independently: if every tree's interval shares a common
    region, report the intersection with support 1; otherwise report the
    region covered by the most trees, with support = covering / n_trees.
    Discrete params snap endpoints outward to the step lattice so the range
    always contains a feasible value.
    """
    if forest.space_fingerprint != space.fingerprint():
        raise ValueError("forest was fitted over a different space (fingerprint mismatch)")
    per_tree = tree_bounds(forest, space)
    n_trees = len(per_tree)
    leaf_values = np.array([tb.leaf_value for tb in per_tree])

    rows: list[tuple[str, float, float, float]] = []
    for i, p in enumerate(space.params):
        los = np.array([tb.lo[i] for tb in per_tree])
        his = np.array([tb.hi[i] for tb in per_tree])
        lo, hi = float(los.max()), float(his.min())
        if lo <= hi:
            count = n_trees
        else:
            lo, hi, count = _sweep_interval(los, his, leaf_values)
        lo, hi = _snap_outward(p, lo, hi)
        rows.append((p.name, lo, hi, count / n_trees))

    return BoundsReport(
        metric=forest.target_metric,
        direction=forest.direction,
        n_trees=n_trees,
        surrogate_r2=surrogate_r2,
        params=tuple(rows),
    )
