# %% [markdown]
# Board, move generation and the two search regimes.
#
# Run with `python demos/01_board_and_search.py`. Takes a few seconds.

# %%
from probchess import Position, SearchLimits, parse_fen, perft, search
from probchess.chesscore import san
from probchess.search import material_evaluator

start = Position.start()
print(start.fen())
print("perft 1..3:", [perft(start, d) for d in range(1, 4)])

# %% [markdown]
# A depth-limited search spends the same depth on every line. A
# probability-limited search splits a budget of 1.0 among the children and
# stops expanding once a node's share drops below the threshold.

# %%
pos = parse_fen("r1bqkb1r/pppp1ppp/2n2n2/4p2Q/2B1P3/8/PPPP1PPP/RNB1K1NR w KQkq - 4 4")
for limits in (SearchLimits.depth_limited(3), SearchLimits.probability_limited(1e-4)):
    res = search(pos, limits, material_evaluator)
    line, p = [], pos
    for m in res.pv:
        line.append(san(p, m))
        p = p.apply(m)
    print(f"{limits.regime:12s} score {res.score:+6d}  nodes {res.nodes:6d}  pv {' '.join(line)}")

# %% [markdown]
# Mates are reported as a distance: +1 means mate on the next move.

# %%
res = search(parse_fen("6k1/5ppp/8/8/8/8/5PPP/R5K1 w - - 0 1"), SearchLimits.depth_limited(2),
             material_evaluator)
print("back-rank:", res.best_move.uci(), "mate in", res.mate_in)
