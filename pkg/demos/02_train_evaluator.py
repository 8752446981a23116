# %% [markdown]
# Evaluator training at desk scale: synthetic games, a perturbed position
# corpus, a material bootstrap, then TD-Leaf self-play.
#
# `python demos/02_train_evaluator.py [iterations]` (default 5; each
# iteration of 16 self-play traces takes about 20 s on one core). The
# trained weights are saved to demo_eval.pcnn in the current directory.

# %%
import random
import sys

from probchess import neuralnet as nn
from probchess.engine import NetEvaluator
from probchess.evalharness import run_sts, sanity_suite
from probchess.features import LAYOUT
from probchess.training import (BootstrapConfig, TdConfig, bootstrap_material,
                                generate_eval_corpus, synthesize_games, train_eval)

iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 5
rng = random.Random(0)

# %% [markdown]
# Games come from a shallow material search with some random moves mixed in.
# Every sampled position then gets one random legal move, which unbalances
# material more often than positions from sensible play do.

# %%
games = synthesize_games(30, rng)
corpus = generate_eval_corpus([" ".join(g) for g in games], 1000, rng)
print(len(games), "games,", len(corpus), "positions")

# %%
net = nn.build(nn.default_topology(LAYOUT.groups, "tanh", 1.0), seed=0)
net, boot = bootstrap_material(net, corpus, rng, BootstrapConfig())
print(f"bootstrap: held-out correlation {boot['correlation']:.3f} after {boot['epochs']} epochs")

suite = sanity_suite()
print("sanity suite after bootstrap:", run_sts(NetEvaluator(net), suite, nodes=1000).total, "/ 200")

# %% [markdown]
# Each TD-Leaf iteration plays 12 searched moves from each sampled position
# and pulls every PV leaf toward the lambda-discounted sum of later score
# changes.

# %%
history = train_eval(net, corpus, iterations, TdConfig(batch_size=16, nodes=1000), rng,
                     sts_records=suite, sts_every=max(iterations, 1), sts_nodes=1000)
for h in history:
    if "mean_abs_error" in h:
        print(f"iteration {h['iteration']:3d}  mean |error| {h['mean_abs_error']:.3f}")
print("sanity suite after TD-Leaf:", history[-1].get("sts_score"))
nn.save("demo_eval.pcnn", net)
