# %% [markdown]
# The move-probability network: sample internal search nodes, label them with
# the searched best move, train, and compare top-k accuracy to uniform.
#
# `python demos/03_move_network.py` (about a minute). Uses the material
# evaluator so that it runs without trained weights.

# %%
import random

from probchess import SearchLimits
from probchess.evalharness import random_openings
from probchess.probestimator import NetEstimator, UniformEstimator, top_k_accuracy
from probchess.search import material_evaluator
from probchess.training import (SAMPLED_GAME, MoveNetConfig, TrainingPosition, generate_internal_corpus,
                                label_best_moves, train_movenet)

rng = random.Random(0)
roots = [TrainingPosition(p, SAMPLED_GAME) for p in random_openings(150, plies=8, seed=1)]

# %% [markdown]
# Internal nodes are what the estimator sees during search, so those are the
# positions it is trained on.

# %%
internal = generate_internal_corpus(roots, SearchLimits.probability_limited(1e-4, nodes=300),
                                    0.3, rng, material_evaluator, capacity=3000)
records = label_best_moves(internal, SearchLimits.probability_limited(1e-4, nodes=150),
                           material_evaluator)
print(len(records), "labelled positions")

# %%
net, m = train_movenet(records, MoveNetConfig(epochs=5, scale=0.5))
print(f"held-out top-1 {m['heldout_top1']:.3f} (uniform {m['uniform_top1']:.3f})")
print(f"held-out top-3 {m['heldout_top3']:.3f} (uniform {m['uniform_top3']:.3f})")

# %% [markdown]
# The trained net plugs into the searcher as a move-probability estimator.

# %%
test = records[-200:]
for name, est in (("uniform", UniformEstimator()), ("net", NetEstimator(net))):
    print(name, [round(top_k_accuracy(est, test, k), 3) for k in (1, 3, 5)])
