import json

import numpy as np
import pytest

from tunelens import (
    AdaptiveState,
    GridSpec,
    adaptive_init,
    adaptive_refine,
    batch_jsonl,
    grid_points,
    naive_grid,
    parse_space,
)

IC_RANGES = {
    "beta1": {"min": 0.5, "max": 0.9, "intervals": 2},
    "beta2": {"min": 0.9, "max": 0.999, "intervals": 2},
    "learning_rate": {"min": 1e-6, "max": 1.0, "intervals": 3},
}

MT_LISTS = {
    "encoder_heads": [8, 16],
    "decoder_heads": [8, 16],
    "dropout": [0.1, 0.2, 0.3, 0.4, 0.5],
    "encoder_hidden": [128, 256, 512, 1024, 2048],
    "decoder_hidden": [128, 256, 512, 1024, 2048],
    "batch_size": [512, 1024, 2048],
}


class TestGridPoints:
    def test_two_point_endpoints(self):
        assert grid_points(0.5, 0.9, 2) == [0.5, 0.9]
        assert grid_points(0.0, 1.0, 2) == [0.0, 1.0]

    def test_three_point_formula(self):
        pts = grid_points(1e-6, 1.0, 3)
        assert pts[0] == 1e-6 and pts[-1] == 1.0
        assert pts[1] == pytest.approx(0.5000005, abs=1e-15)

    def test_increment_formula(self):
        pts = grid_points(2.0, 10.0, 5)
        assert pts == [2.0, 4.0, 6.0, 8.0, 10.0]

    def test_intervals_below_two_rejected(self):
        with pytest.raises(ValueError, match="intervals"):
            grid_points(0.0, 1.0, 1)


class TestNaiveGrid:
    def test_full_product_size(self):
        batch = naive_grid(GridSpec.from_doc(MT_LISTS))
        assert len(batch) == 2 * 2 * 5 * 5 * 5 * 3 == 1500
        assert len({tuple(sorted(c.items())) for c in batch}) == 1500

    def test_single_value(self):
        batch = naive_grid(GridSpec.from_doc({"a": [3.0]}))
        assert batch == [{"a": 3.0}]

    def test_row_major_order(self):
        batch = naive_grid(GridSpec.from_doc({"a": [8, 16], "b": [0.1, 0.2]}))
        assert batch == [
            {"a": 8.0, "b": 0.1},
            {"a": 8.0, "b": 0.2},
            {"a": 16.0, "b": 0.1},
            {"a": 16.0, "b": 0.2},
        ]

    def test_requires_lists(self):
        with pytest.raises(ValueError, match="explicit value lists"):
            naive_grid(GridSpec.from_doc({"a": {"min": 0, "max": 1, "intervals": 2}}))

    def test_unsorted_list_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            GridSpec.from_doc({"a": [2.0, 1.0]})

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError, match="empty value list"):
            GridSpec.from_doc({"a": []})


class TestAdaptive:
    def test_init_batch_size(self):
        state, batch = adaptive_init(GridSpec.from_doc(IC_RANGES))
        assert state.round == 0
        assert len(batch) == 2 * 2 * 3 == 12

    def test_init_single_param(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        assert [c["h"] for c in batch] == [0.0, 0.5, 1.0]

    def test_degenerate_intervals_rejected(self):
        with pytest.raises(ValueError, match="intervals"):
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 1}})

    def test_refine_centers_on_best(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        results = [(c, -abs(c["h"] - 0.5)) for c in batch]
        state2, batch2 = adaptive_refine(state, results, "maximize")
        assert state2.current_bounds == (("h", 0.25, 0.75),)
        assert [c["h"] for c in batch2] == [0.25, 0.5, 0.75]
        assert state2.round == 1

    def test_refine_clips_and_shifts_at_edge(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        results = [(c, -c["h"]) for c in batch]  # best at 0.0
        state2, batch2 = adaptive_refine(state, results, "maximize")
        assert state2.current_bounds == (("h", 0.0, 0.5),)
        assert [c["h"] for c in batch2] == [0.0, 0.25, 0.5]

    def test_minimize_picks_lowest(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        results = [(c, c["h"]) for c in batch]
        state2, _ = adaptive_refine(state, results, "minimize")
        assert state2.best_so_far == ({"h": 0.0}, 0.0)

    def test_results_must_cover_batch(self):
        state, _ = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        with pytest.raises(ValueError, match="cover no config"):
            adaptive_refine(state, [({"h": 0.123}, 1.0)], "maximize")

    def test_narrowing_is_monotone(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 5}})
        )
        rng = np.random.default_rng(0)
        for _ in range(4):
            prev_span = state.current_bounds[0][2] - state.current_bounds[0][1]
            results = [(c, float(rng.random())) for c in batch]
            state, batch = adaptive_refine(state, results, "maximize")
            span = state.current_bounds[0][2] - state.current_bounds[0][1]
            assert span < prev_span
            o_lo, o_hi = 0.0, 1.0
            assert all(o_lo <= c["h"] <= o_hi for c in batch)

    def test_discrete_snapping(self):
        space = parse_space(
            {
                "params": [
                    {"name": "width", "kind": "discrete", "lower": 0, "upper": 64, "step": 16}
                ],
                "metrics": [{"name": "m", "direction": "maximize"}],
            }
        )
        state, batch = adaptive_init(
            GridSpec.from_doc({"width": {"min": 0, "max": 64, "intervals": 5}}), space
        )
        assert [c["width"] for c in batch] == [0.0, 16.0, 32.0, 48.0, 64.0]
        state, batch = adaptive_refine(state, [({"width": 32.0}, 1.0)], "maximize", space=space)
        # window [16, 48] -> grid snaps onto the lattice, duplicates collapse
        assert all(c["width"] in {16.0, 32.0, 48.0} for c in batch)

    def test_dedup_flag(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        results = [(c, -abs(c["h"] - 0.5)) for c in batch]
        _, batch2 = adaptive_refine(
            state, results, "maximize", dedup_against=[{"h": 0.5}]
        )
        assert [c["h"] for c in batch2] == [0.25, 0.75]

    def test_state_round_trip(self):
        state, batch = adaptive_init(GridSpec.from_doc(IC_RANGES))
        results = [(c, c["beta1"]) for c in batch]
        state, _ = adaptive_refine(state, results, "maximize")
        doc = json.loads(json.dumps(state.to_doc()))
        assert AdaptiveState.from_doc(doc) == state

    def test_batch_jsonl_shape(self):
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 1.0, "intervals": 3}})
        )
        lines = batch_jsonl(batch, state.round).splitlines()
        assert len(lines) == 3
        first = json.loads(lines[0])
        assert first == {"config": {"h": 0.0}, "round": 0}


class TestConvergenceHarness:
    def test_three_rounds_strictly_approach_target(self):
        # target 0.37; the [0, 4.2] window makes every refinement strictly
        # improve for three rounds (grids recentered on dyadic fractions of
        # the span would otherwise plateau).
        target = 0.37
        state, batch = adaptive_init(
            GridSpec.from_doc({"h": {"min": 0.0, "max": 4.2, "intervals": 5}})
        )
        errors = []
        for _ in range(4):
            results = [(c, -((c["h"] - target) ** 2)) for c in batch]
            best = max(results, key=lambda r: r[1])
            errors.append(abs(best[0]["h"] - target))
            state, batch = adaptive_refine(state, results, "maximize")
        assert errors[1] < errors[0]
        assert errors[2] < errors[1]
        assert errors[3] < errors[2]
