import math
import random

import numpy as np
import pytest

from probchess import neuralnet as nn
from probchess.chesscore import Position, game_state, is_attacked, parse_fen, parse_uci
from probchess.engine import NetEvaluator
from probchess.features import LAYOUT, extract
from probchess.probestimator import MOVE_GROUPS
from probchess.search import SearchLimits, material_evaluator
from probchess.training import (INTERNAL_NODE, RANDOM_MOVE_PERTURBED, BootstrapConfig,
                                BootstrapFailed, LabeledMoveRecord, MoveNetConfig, TdConfig,
                                TdTrace, bootstrap_material, expand_records,
                                generate_eval_corpus, generate_internal_corpus, label_best_moves,
                                load_positions, load_records, material_imbalance, material_target,
                                read_games, save_positions, save_records, self_play_trace,
                                synthesize_games, tdleaf_contributions, tdleaf_error,
                                tdleaf_gradient, tdleaf_iteration, train_movenet, write_games)

TABLE_SCORES = [10, 20, 20, 20, -10, -10, -10, 40, 40, 40, 40, 40]


def direct_error(scores, lam, t):
    """Oracle: literal double loop over later steps."""
    total = 0.0
    for k in range(t + 1, len(scores)):
        total += lam ** (k - t) * (scores[k] - scores[k - 1])
    return total


def test_worked_example_contributions():
    c = tdleaf_contributions(TABLE_SCORES, 0.7)
    assert c[1] == pytest.approx(7, abs=0.01)
    assert c[4] == pytest.approx(-7.2, abs=0.01)
    assert c[7] == pytest.approx(4.12, abs=0.01)
    assert [i for i, v in enumerate(c) if v] == [1, 4, 7]
    assert sum(c) == pytest.approx(7 - 7.2030 + 4.1177, abs=1e-3)


def test_error_matches_direct_summation():
    rng = random.Random(0)
    for _ in range(50):
        scores = [rng.uniform(-1, 1) for _ in range(rng.randrange(1, 13))]
        lam = rng.uniform(0.05, 1.0)
        e = tdleaf_error(scores, lam)
        for t in range(len(scores)):
            assert e[t] == pytest.approx(direct_error(scores, lam, t), abs=1e-12)
    assert tdleaf_error(TABLE_SCORES, 0.7)[0] == pytest.approx(3.915, abs=0.01)


def test_error_edge_cases():
    assert tdleaf_error([5.0] * 12, 0.7) == [0.0] * 12
    assert tdleaf_error([0.3], 0.7) == [0.0]
    assert tdleaf_error([], 0.7) == []
    with pytest.raises(ValueError):
        tdleaf_error([1, 2], 0.0)


def test_error_linearity_and_telescoping():
    rng = random.Random(1)
    scores = [rng.uniform(-1, 1) for _ in range(12)]
    base = tdleaf_error(scores, 0.7)
    scaled = tdleaf_error([3 * s for s in scores], 0.7)
    assert scaled == pytest.approx([3 * e for e in base])
    assert tdleaf_error(scores, 1.0)[0] == pytest.approx(scores[-1] - scores[0])


def test_trace_invariants():
    t = TdTrace([0.1, 0.2, 0.0], [Position.start()] * 3, [1, -1, 1])
    assert t.differences == pytest.approx([0.1, -0.2])
    with pytest.raises(ValueError):
        TdTrace([0.0] * 13, [Position.start()] * 13, [1] * 13)
    with pytest.raises(ValueError):
        TdTrace([0.0, 1.0], [Position.start()], [1, 1])


@pytest.fixture(scope="module")
def games():
    return synthesize_games(6, random.Random(3), max_plies=60, nodes=100)


@pytest.fixture(scope="module")
def corpus(games):
    return generate_eval_corpus([" ".join(g) for g in games], 300, random.Random(4))


@pytest.fixture(scope="module")
def boot_net(corpus):
    net = nn.build(nn.default_topology(LAYOUT.groups, "tanh", 0.5), seed=1)
    return bootstrap_material(net, corpus, random.Random(0), BootstrapConfig(min_epochs=30))


def test_game_file_round_trip(tmp_path, games):
    path = tmp_path / "games.txt"
    write_games(path, games)
    parsed = read_games(open(path))
    assert parsed.skipped == 0 and len(parsed.games) == len(games)
    assert [len(g) - 1 for g in parsed.games] == [len(g) for g in games]


def test_bad_game_records_are_counted():
    parsed = read_games(["e2e4 e7e5", "e2e4 e2e4", "# comment", "", "d2d4 zz"])
    assert len(parsed.games) == 1 and parsed.skipped == 2


def test_corpus_positions_are_one_random_move_away(corpus):
    assert len(corpus) == 300
    for tp in corpus:
        assert tp.provenance == RANDOM_MOVE_PERTURBED
        assert not game_state(tp.position).is_terminal
        assert any(tp.source.apply(m) == tp.position for m in tp.source.legal_moves())


def test_corpus_rejects_bad_target(games):
    with pytest.raises(ValueError):
        generate_eval_corpus([" ".join(games[0])], 0, random.Random(0))


def test_positions_file_round_trip(tmp_path, corpus):
    save_positions(tmp_path / "c.jsonl", corpus[:20])
    back = load_positions(tmp_path / "c.jsonl")
    assert [b.position.fen() for b in back] == [c.position.fen() for c in corpus[:20]]


def test_material_target():
    assert material_target(Position.start()) == 0.0
    p = parse_fen("4k3/8/8/8/8/8/8/3QK3 b - - 0 1")
    assert material_target(p) == pytest.approx(-math.tanh(0.9))


def test_bootstrap_reaches_target(boot_net):
    net, metrics = boot_net
    assert metrics["correlation"] >= 0.9
    ev = NetEvaluator(net)
    assert abs(ev(Position.start())) < 0.1
    assert ev(parse_fen("rnb1kbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1")) > 0


def test_bootstrap_failure_is_reported(corpus):
    net = nn.build(nn.default_topology(LAYOUT.groups, "tanh", 0.25), seed=1)
    with pytest.raises(BootstrapFailed):
        bootstrap_material(net, corpus, random.Random(0),
                           BootstrapConfig(max_epochs=1, min_epochs=1, target_correlation=0.9999))


def test_self_play_trace_is_reproducible(boot_net, corpus):
    net, _ = boot_net
    cfg = TdConfig(nodes=200)
    ev = NetEvaluator(net)
    a = self_play_trace(ev, corpus[0].position, cfg)
    b = self_play_trace(ev, corpus[0].position, cfg)
    assert a.scores == b.scores and [x.fen() for x in a.leaves] == [x.fen() for x in b.leaves]
    assert 1 <= len(a.scores) <= 12


def test_trace_scores_follow_start_perspective():
    # material-only search: white is a queen up, so every score favours white
    p = parse_fen("4k3/8/8/8/8/8/3PPP2/3QK3 w - - 0 1")
    tr = self_play_trace(material_evaluator, p, TdConfig(nodes=300, plies=6))
    assert all(s > 0 for s in tr.scores)
    q = parse_fen("4k3/8/8/8/8/8/3PPP2/3QK3 b - - 0 1")
    tr = self_play_trace(material_evaluator, q, TdConfig(nodes=300, plies=6))
    assert all(s < 0 for s in tr.scores)


def test_trace_truncates_at_terminal():
    p = parse_fen("6k1/5ppp/8/8/8/8/5PPP/R5K1 w - - 0 1")
    tr = self_play_trace(material_evaluator, p, TdConfig(nodes=300))
    assert len(tr.scores) == 2
    assert tr.scores[-1] == 1.0 and tr.signs[-1] == 0  # black is mated: +1 for white


def test_consistent_traces_give_no_update(boot_net):
    net, _ = boot_net
    net = net.copy()
    leaves = [Position.start()] * 4
    traces = [TdTrace([0.25] * 4, leaves, [1, -1, 1, -1])]
    g, errors = tdleaf_gradient(net, traces)
    assert g.norm() == 0 and errors == [0.0] * 4
    before = [w.copy() for w in net.parameters()]
    nn.step(net, nn.make_optimizer(net, "adadelta"), g)
    assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))


def test_gradient_moves_leaf_toward_later_scores(boot_net):
    net, _ = boot_net
    net = net.copy()
    leaf = parse_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 1")
    tr = TdTrace([0.0, 0.5], [leaf, leaf], [1, 1])  # later search liked it more
    g, _ = tdleaf_gradient(net, [tr], first_only=True)
    before = net.forward(extract(leaf))
    nn.step(net, nn.make_optimizer(net, "sgd-momentum", lr=1e-3, momentum=0.0), g)
    assert net.forward(extract(leaf)) > before
    # flipped perspective pushes the other way
    net2 = boot_net[0].copy()
    g2, _ = tdleaf_gradient(net2, [TdTrace([0.0, 0.5], [leaf, leaf], [-1, 1])], first_only=True)
    nn.step(net2, nn.make_optimizer(net2, "sgd-momentum", lr=1e-3, momentum=0.0), g2)
    assert net2.forward(extract(leaf)) < before


def test_tdleaf_iteration_metrics(boot_net, corpus):
    net, _ = boot_net
    net = net.copy()
    state = nn.make_optimizer(net, "adadelta")
    m = tdleaf_iteration(net, state, corpus, TdConfig(batch_size=2, nodes=150, plies=4), random.Random(0))
    assert m["traces"] == 2 and math.isfinite(m["mean_abs_error"]) and state.steps == 1
    for w, mask in zip(net.weights, net.topology.masks()):
        assert not w[~mask].any()


def test_internal_corpus(corpus):
    roots = corpus[:3]
    lim = SearchLimits.probability_limited(1e-3, nodes=400)
    assert generate_internal_corpus(roots, lim, 0.0, random.Random(0), material_evaluator) == []
    out = generate_internal_corpus(roots, lim, 1.0, random.Random(0), material_evaluator, capacity=50)
    assert 0 < len(out) <= 50 and all(tp.provenance == INTERNAL_NODE for tp in out)
    # every sample lies within a few plies of one of the roots
    reach = set()
    frontier = [r.position for r in roots]
    for _ in range(4):
        frontier = [c for p in frontier for c in (p.apply(m) for m in p.legal_moves())]
        reach.update(c.hash for c in frontier)
    assert all(tp.position.hash in reach for tp in out)


def test_labelling():
    mate = parse_fen("6k1/5ppp/8/8/8/8/5PPP/R5K1 w - - 0 1")
    dead = parse_fen("R5k1/5ppp/8/8/8/8/5PPP/6K1 b - - 0 1")
    lim = SearchLimits.probability_limited(1e-3, nodes=500)
    recs = label_best_moves([mate, dead, Position.start()], lim, material_evaluator)
    assert len(recs) == 2
    assert recs[0].best_move.uci() == "a1a8"
    again = label_best_moves([Position.start()], lim, material_evaluator)
    assert again[0].best_move == recs[1].best_move


def test_record_validation_and_round_trip(tmp_path):
    p = Position.start()
    with pytest.raises(ValueError):
        LabeledMoveRecord(p, parse_uci(p.apply(parse_uci(p, "e2e4")), "e7e5"))
    recs = [LabeledMoveRecord(p, parse_uci(p, "e2e4"))]
    save_records(tmp_path / "r.jsonl", recs)
    back = load_records(tmp_path / "r.jsonl")
    assert back[0].best_move == recs[0].best_move and len(back[0].moves) == 20


def _toy_records(n, seed=0):
    rng = random.Random(seed)
    from conftest import random_positions
    out = []
    for p in random_positions(n, seed=seed, max_plies=30):
        moves = p.legal_moves()
        caps = [m for m in moves if m.captured]
        out.append(LabeledMoveRecord(p, caps[0] if caps else rng.choice(moves)))
    return out


def test_expansion_has_one_positive_per_record():
    recs = _toy_records(30)
    ex = expand_records(recs)
    assert ex.targets.sum() == 30
    assert len(ex.targets) == sum(len(r.moves) for r in recs)
    for i, r in enumerate(recs):
        a, b = ex.offsets[i], ex.offsets[i + 1]
        assert ex.targets[a:b].sum() == 1 and np.all(ex.record_index[a:b] == i)


def test_zero_epochs_leaves_net_unchanged():
    net = nn.build(nn.default_topology(MOVE_GROUPS, "logistic", 0.25), seed=2)
    before = [w.copy() for w in net.parameters()]
    out, metrics = train_movenet(_toy_records(10), MoveNetConfig(epochs=0), net=net)
    assert all(np.array_equal(a, b) for a, b in zip(before, out.parameters()))
    assert metrics["epochs"] == []


def test_movenet_learns_a_simple_rule():
    # "best" move is the first capture when there is one: learnable from the move block
    recs = _toy_records(300, seed=1)
    net, metrics = train_movenet(recs, MoveNetConfig(epochs=6, scale=0.25, holdout=0.2))
    assert len(metrics["epochs"]) == 6
    assert metrics["epochs"][-1]["train_loss"] < metrics["epochs"][0]["train_loss"]
    assert metrics["heldout_top3"] > metrics["uniform_top3"]


def test_trace_leaves_reproduce_their_scores(boot_net, corpus):
    ev = NetEvaluator(boot_net[0])
    checked = 0
    for tp in corpus[:4]:
        tr = self_play_trace(ev, tp.position, TdConfig(nodes=400))
        for s, leaf, sign in zip(tr.scores, tr.leaves, tr.signs):
            if sign:
                checked += 1
                assert sign * ev(leaf) == pytest.approx(s, abs=1e-4)
    assert checked


def test_perturbation_adds_material_imbalance(games):
    # same 10k (game, ply) draws: imbalance before and after the random move
    corpus = generate_eval_corpus([" ".join(g) for g in games], 10_000, random.Random(9))
    raw = np.mean([material_imbalance(tp.source) != 0 for tp in corpus])
    perturbed = np.mean([material_imbalance(tp.position) != 0 for tp in corpus])
    assert perturbed > raw


def test_internal_nodes_are_at_least_as_unbalanced_as_roots(corpus):
    roots = corpus
    lim = SearchLimits.probability_limited(1e-4, nodes=400)
    out = generate_internal_corpus(roots, lim, 1.0, random.Random(3), material_evaluator,
                                   capacity=10_000)
    assert len(out) >= 10_000
    assert (np.mean([material_imbalance(tp.position) for tp in out])
            >= np.mean([material_imbalance(tp.position) for tp in roots]))


def _with_white_pawn(p, sq):
    rows = p.fen().split()[0].split("/")
    grid = [list("".join("." * int(c) if c.isdigit() else c for c in row)) for row in rows]
    file, rank = sq % 8, sq // 8
    if grid[7 - rank][file] != ".":
        return None
    grid[7 - rank][file] = "P"
    board = "/".join("".join(row) for row in grid)
    for n in range(8, 0, -1):
        board = board.replace("." * n, str(n))
    try:
        q = parse_fen(" ".join([board, *p.fen().split()[1:]]))
    except ValueError:
        return None
    # white to move with black in check would be an impossible position
    if q.turn == 1 and is_attacked(q.board, q.board.index(-6), 1):
        return None
    return q


@pytest.fixture(scope="module")
def full_bootstrap():
    # a small corpus overfits: 1k positions give about 80% agreement, 30k about 96%
    games = synthesize_games(100, random.Random(0))
    positions = generate_eval_corpus([" ".join(g) for g in games], 30_000, random.Random(1))
    net = nn.build(nn.default_topology(LAYOUT.groups, "tanh", 1.0), seed=0)
    net, _ = bootstrap_material(net, positions, random.Random(0), BootstrapConfig(min_epochs=30))
    return net, positions


def test_bootstrap_monotone_in_extra_pawn(full_bootstrap):
    net, positions = full_bootstrap
    ev = NetEvaluator(net)
    rng = random.Random(12)
    agree = pairs = 0
    while pairs < 1000:
        p = rng.choice(positions).position
        if p.fen().split()[0].count("P") >= 8:
            continue
        q = _with_white_pawn(p, rng.randrange(8, 56))
        if q is None or not q.legal_moves():
            continue
        pairs += 1
        white_view = lambda pos: pos.turn * ev(pos)
        agree += white_view(q) > white_view(p)
    assert agree / pairs >= 0.95
