"""Generate the next batch of configurations to train.

Naive grid search enumerates preset value lists. Adaptive grid search
halves each dimension's window every round and re-centers on the best
coordinate so far, clipping (and shifting) at the original bounds.
"""

import json

from tunelens import GridSpec, adaptive_init, adaptive_refine, batch_jsonl, naive_grid

# Naive: the full Cartesian product of preset lists (6 dims -> 1500 configs)
lists = GridSpec.from_doc(
    {
        "encoder_heads": [8, 16],
        "decoder_heads": [8, 16],
        "dropout": [0.1, 0.2, 0.3, 0.4, 0.5],
        "encoder_hidden": [128, 256, 512, 1024, 2048],
        "decoder_hidden": [128, 256, 512, 1024, 2048],
        "batch_size": [512, 1024, 2048],
    }
)
batch = naive_grid(lists)
print(f"naive grid: {len(batch)} configs; first two:")
print(" ", batch[0])
print(" ", batch[1])

# Adaptive: three params, a few intervals each, narrowing each round
spec = GridSpec.from_doc(
    {
        "beta1": {"min": 0.5, "max": 0.9, "intervals": 2},
        "beta2": {"min": 0.9, "max": 0.999, "intervals": 2},
        "learning_rate": {"min": 1e-6, "max": 1.0, "intervals": 3},
    }
)
state, batch = adaptive_init(spec)
print(f"\nadaptive round 0: {len(batch)} configs")


def fake_training_score(config):  # pretend optimum near lr=0.2, beta1=0.62
    return -((config["learning_rate"] - 0.2) ** 2) - (config["beta1"] - 0.62) ** 2


for round_no in range(1, 4):
    results = [(c, fake_training_score(c)) for c in batch]
    state, batch = adaptive_refine(state, results, "maximize", shrink=0.5)
    lo, hi = state.current_bounds[2][1], state.current_bounds[2][2]
    best = state.best_so_far
    print(
        f"adaptive round {round_no}: lr window [{lo:.4g}, {hi:.4g}], "
        f"best so far lr={best[0]['learning_rate']:.4g} score={best[1]:.4g}"
    )

print("\nbatch as JSONL (ready for the training harness):")
print(batch_jsonl(batch[:3], state.round))

# States serialize, so a tuning session can resume after a restart
blob = json.dumps(state.to_doc())
print("\nresumable state:", blob[:80], "...")
