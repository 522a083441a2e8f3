import json

import numpy as np
import pytest

from tunelens import (
    Forest,
    ForestConfig,
    Leaf,
    Split,
    ZeroVarianceError,
    fit_forest,
    forest_from_doc,
    forest_to_doc,
    predict,
    predict_batch,
    r_squared,
)
from tunelens.forest import iter_leaves

EXACT = ForestConfig(n_trees=1, min_samples_leaf=1, bootstrap=False, feature_subsample=1.0)


def test_four_point_split(space_1d):
    X = np.array([[0.0], [0.1], [0.9], [1.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    f = fit_forest(X, y, space_1d, space_1d.metric("acc"), EXACT, seed=0)
    root = f.trees[0]
    assert isinstance(root, Split)
    assert root.threshold == 0.5  # midpoint of 0.1 and 0.9 wins by variance reduction
    assert isinstance(root.left, Leaf) and root.left.value == 0.0
    assert isinstance(root.right, Leaf) and root.right.value == 1.0
    assert predict(f, [0.3]) == 0.0
    assert predict(f, [0.6]) == 1.0


def test_constant_target_single_leaf(space_2d):
    X = np.random.default_rng(0).random((12, 2))
    y = np.full(12, 0.9)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), ForestConfig(n_trees=5), seed=1)
    for tree in f.trees:
        assert isinstance(tree, Leaf) and tree.value == 0.9
    assert predict(f, [0.2, 0.8]) == 0.9


def test_determinism(space_2d):
    rng = np.random.default_rng(5)
    X = rng.random((40, 2))
    y = rng.random(40)
    cfg = ForestConfig(n_trees=8)
    a = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=42)
    b = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=42)
    assert a == b  # bit-identical structure
    c = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=43)
    assert a != c


def test_identical_rows_different_targets_yields_mean_leaf(space_1d):
    X = np.array([[0.5], [0.5], [0.5]])
    y = np.array([0.0, 1.0, 2.0])
    f = fit_forest(X, y, space_1d, space_1d.metric("acc"), EXACT, seed=0)
    assert isinstance(f.trees[0], Leaf)
    assert f.trees[0].value == pytest.approx(1.0)


def test_mean_of_trees(space_1d):
    t1 = Leaf(0.4, 3)
    t2 = Leaf(0.6, 3)
    f = Forest(
        trees=(t1, t2),
        space_fingerprint=space_1d.fingerprint(),
        target_metric="acc",
        direction="maximize",
        seed=0,
        config=ForestConfig(n_trees=2),
        n_features=1,
    )
    assert predict(f, [0.1]) == pytest.approx(0.5)


def test_dimension_mismatch(space_2d):
    rng = np.random.default_rng(2)
    f = fit_forest(rng.random((10, 2)), rng.random(10), space_2d, space_2d.metric("acc"), seed=0)
    with pytest.raises(ValueError, match="dimension mismatch"):
        predict(f, [0.1])


def test_r_squared_hand_values(space_1d):
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    half = Forest(
        trees=(Leaf(0.5, 2),),
        space_fingerprint=space_1d.fingerprint(),
        target_metric="acc",
        direction="maximize",
        seed=0,
        config=ForestConfig(n_trees=1),
        n_features=1,
    )
    assert r_squared(half, X, y) == pytest.approx(0.0)

    quarter = Forest(
        trees=(Split(0, 0.5, Leaf(0.25, 1), Leaf(0.75, 1)),),
        space_fingerprint=space_1d.fingerprint(),
        target_metric="acc",
        direction="maximize",
        seed=0,
        config=ForestConfig(n_trees=1),
        n_features=1,
    )
    assert r_squared(quarter, X, y) == pytest.approx(0.75)


def test_r_squared_perfect_and_zero_variance(space_1d):
    X = np.array([[0.0], [0.1], [0.9], [1.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    f = fit_forest(X, y, space_1d, space_1d.metric("acc"), EXACT, seed=0)
    assert r_squared(f, X, y) == 1.0
    with pytest.raises(ZeroVarianceError):
        r_squared(f, X, np.full(4, 0.3))


def test_exact_fit_property(space_2d):
    rng = np.random.default_rng(9)
    X = rng.random((60, 2))
    y = rng.random(60)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), EXACT, seed=0)
    np.testing.assert_allclose(predict_batch(f, X), y, atol=1e-12)


def test_leaf_count_conservation(space_2d):
    rng = np.random.default_rng(11)
    X = rng.random((50, 2))
    y = rng.random(50)
    cfg = ForestConfig(n_trees=4, min_samples_leaf=3, bootstrap=False, feature_subsample=1.0)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=3)
    for tree in f.trees:
        assert sum(leaf.count for leaf in iter_leaves(tree)) == 50


def test_interpolation_bound(space_2d):
    rng = np.random.default_rng(13)
    X = rng.random((80, 2))
    y = rng.normal(size=80)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), ForestConfig(n_trees=10), seed=7)
    grid = rng.random((200, 2))
    preds = predict_batch(f, grid)
    assert preds.min() >= y.min() - 1e-12
    assert preds.max() <= y.max() + 1e-12


def test_monotone_refit_on_duplicated_data(space_2d):
    # With min_samples_leaf=1 a pure duplicate of the dataset doubles every
    # count but changes no split, so single-tree predictions are unchanged.
    rng = np.random.default_rng(17)
    X = rng.random((30, 2))
    y = rng.random(30)
    f1 = fit_forest(X, y, space_2d, space_2d.metric("acc"), EXACT, seed=0)
    f2 = fit_forest(
        np.vstack([X, X]), np.concatenate([y, y]), space_2d, space_2d.metric("acc"), EXACT, seed=0
    )
    grid = rng.random((100, 2))
    np.testing.assert_allclose(predict_batch(f1, grid), predict_batch(f2, grid), atol=0)


def test_min_samples_leaf_respected(space_2d):
    rng = np.random.default_rng(19)
    X = rng.random((40, 2))
    y = rng.random(40)
    cfg = ForestConfig(n_trees=6, min_samples_leaf=4)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=5)
    for tree in f.trees:
        for leaf in iter_leaves(tree):
            assert leaf.count >= 4


def test_max_depth(space_2d):
    rng = np.random.default_rng(23)
    X = rng.random((64, 2))
    y = rng.random(64)
    cfg = ForestConfig(n_trees=3, max_depth=2, min_samples_leaf=1, bootstrap=False)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), cfg, seed=0)

    def depth(node):
        if isinstance(node, Leaf):
            return 0
        return 1 + max(depth(node.left), depth(node.right))

    assert all(depth(t) <= 2 for t in f.trees)


def test_insufficient_rows(space_1d):
    with pytest.raises(ValueError, match="insufficient rows"):
        fit_forest(np.array([[0.5]]), np.array([1.0]), space_1d, space_1d.metric("acc"), seed=0)


def test_serialization_round_trip(space_2d):
    rng = np.random.default_rng(29)
    X = rng.random((25, 2))
    y = rng.random(25)
    f = fit_forest(X, y, space_2d, space_2d.metric("acc"), ForestConfig(n_trees=5), seed=11)
    doc = json.loads(json.dumps(forest_to_doc(f)))
    g = forest_from_doc(doc)
    assert g == f
    grid = rng.random((50, 2))
    np.testing.assert_array_equal(predict_batch(f, grid), predict_batch(g, grid))
