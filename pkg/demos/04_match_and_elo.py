# %% [markdown]
# A small colour-swapped match between the two search regimes at equal node
# budgets, and the Elo estimate it supports.
#
# `python demos/04_match_and_elo.py [games]` (default 40, about a minute).

# %%
import sys

from probchess.engine import EngineConfig
from probchess.evalharness import elo_diff, elo_from_counts, run_match

games = int(sys.argv[1]) if len(sys.argv) > 1 else 40
prob = EngineConfig(threshold=1e-12)  # node budget binds first
depth = EngineConfig(regime="depth", depth=64)

res = run_match(prob, depth, games, nodes=150, max_moves=60)
print(f"probability vs depth: +{res.wins} ={res.draws} -{res.losses}")
print("estimate:", elo_diff(res))
print("swapped: ", elo_diff(res.swapped()))

# %% [markdown]
# The interval narrows roughly with the square root of the game count.

# %%
for n in (100, 400, 1600, 6400):
    w = round(0.55 * n)
    print(f"{n:5d} games at 55%: {elo_from_counts(w, 0, n - w)}")
