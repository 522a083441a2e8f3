"""Brute-force variance-decomposition oracle for 2-D spaces.

Deliberately independent of the leaf-box integration in the package: it
only walks the public tree structure to find split thresholds, then
evaluates the forest pointwise (via ``predict``) on the partition-aligned
grid and takes empirical weighted variances. Because the forest prediction
is constant on every grid cell, the result is exact up to float error.
"""

from __future__ import annotations

import numpy as np

from tunelens import Forest, SpaceDef, predict
from tunelens.forest import Leaf


def _dim_thresholds(forest: Forest, dim: int, lo: float, hi: float) -> list[float]:
    found = set()
    for tree in forest.trees:
        stack = [tree]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                continue
            if node.feature == dim and lo < node.threshold < hi:
                found.add(node.threshold)
            stack.append(node.left)
            stack.append(node.right)
    return sorted(found)


def dim_cells(forest: Forest, space: SpaceDef, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Representative points and probability weights along one dim."""
    p = space.params[dim]
    if p.kind == "discrete":
        pts = p.lattice()
        return pts, np.full(len(pts), 1.0 / len(pts))
    thr = _dim_thresholds(forest, dim, p.lower, p.upper)
    bnd = np.array([p.lower, *thr, p.upper])
    mids = (bnd[:-1] + bnd[1:]) / 2.0
    weights = np.diff(bnd) / (p.upper - p.lower)
    return mids, weights


def oracle_decomposition_2d(forest: Forest, space: SpaceDef):
    """(fractions keyed like variance_decomposition order 2, total_variance)."""
    assert len(space.params) == 2
    pts1, w1 = dim_cells(forest, space, 0)
    pts2, w2 = dim_cells(forest, space, 1)
    F = np.array([[predict(forest, [x1, x2]) for x2 in pts2] for x1 in pts1])

    mu = float(w1 @ F @ w2)
    total = float(w1 @ ((F - mu) ** 2) @ w2)
    m1 = F @ w2
    m2 = F.T @ w1
    v1 = float(w1 @ (m1 - mu) ** 2)
    v2 = float(w2 @ (m2 - mu) ** 2)
    v12 = max(total - v1 - v2, 0.0)

    n1, n2 = space.param_names
    if total <= 0.0:
        return {(n1,): 0.0, (n2,): 0.0, (n1, n2): 0.0}, 0.0
    return {(n1,): v1 / total, (n2,): v2 / total, (n1, n2): v12 / total}, total


def grid_cell_count(forest: Forest, space: SpaceDef) -> int:
    return int(
        np.prod([len(dim_cells(forest, space, i)[0]) for i in range(len(space.params))])
    )
