import numpy as np
import pytest

from probchess import neuralnet as nn
from probchess.chesscore import Position, parse_fen, parse_uci
from probchess.features import LAYOUT, extract
from probchess.probestimator import (MOVE_GROUPS, MOVE_INPUT_WIDTH, RANK_INDEX, NetEstimator,
                                     UniformEstimator, estimate_net, estimate_uniform, move_block,
                                     move_feature_matrix, predicted_rank, rank_features,
                                     rank_histogram, top_k_accuracy, two_pass_scores)


@pytest.fixture(scope="module")
def move_net():
    return nn.build(nn.default_topology(MOVE_GROUPS, "logistic", 0.25), seed=5)


def test_uniform_distribution():
    p = Position.start()
    d = estimate_uniform(p, p.legal_moves())
    assert len(d) == 20 and all(v == 1 / 20 for v in d.values())
    with pytest.raises(ValueError):
        estimate_uniform(p, [])


def test_move_block_by_hand():
    p = parse_fen("8/P6k/8/8/8/8/8/K7 w - - 0 1")
    v = move_block(parse_uci(p, "a7a8n"), rank=0.5)
    expect = np.zeros(16, np.float32)
    expect[0] = 1  # pawn
    expect[6:10] = [0, 6 / 7, 0, 1]
    expect[11] = 1  # knight promotion
    expect[15] = 0.5
    np.testing.assert_allclose(v, expect, rtol=1e-6)
    v = move_block(parse_uci(Position.start(), "g1f3"))
    assert v[1] == 1 and v[10] == 1 and v[15] == 0


def test_feature_matrix_shares_position_part():
    p = Position.start()
    X = move_feature_matrix(extract(p), p.legal_moves())
    assert X.shape == (20, MOVE_INPUT_WIDTH)
    assert np.all(X[:, :351] == extract(p)) and not X[:, RANK_INDEX].any()


def test_rank_features():
    np.testing.assert_allclose(rank_features(np.array([0.1, 0.9, 0.5])), [1.0, 0.0, 0.5])
    # ties keep list order
    np.testing.assert_allclose(rank_features(np.array([0.3, 0.3])), [0.0, 1.0])
    assert list(rank_features(np.array([0.7]))) == [0.0]


def test_two_pass_uses_first_pass_ranking(move_net):
    p = Position.start()
    X = move_feature_matrix(extract(p), p.legal_moves())
    first, second = two_pass_scores(move_net, X)
    np.testing.assert_allclose(X[:, RANK_INDEX], rank_features(first))
    X2 = X.copy()
    X2[:, RANK_INDEX] = rank_features(first)
    np.testing.assert_allclose(second, move_net.forward_batch(X2))


def test_net_distribution_sums_to_one(move_net, sample_positions):
    for p in sample_positions[:20]:
        moves = p.legal_moves()
        d = estimate_net(p, moves, move_net)
        assert set(d) == set(moves)
        assert abs(sum(d.values()) - 1.0) < 1e-9
        assert all(v > 0 for v in d.values())


def test_single_move_gets_everything(move_net):
    p = parse_fen("7k/8/8/8/8/8/6q1/7K w - - 0 1")
    moves = p.legal_moves()
    assert len(moves) == 1
    assert estimate_net(p, moves, move_net) == {moves[0]: 1.0}


def test_layout_mismatch_rejected():
    net = nn.build(nn.default_topology(LAYOUT.groups, "logistic", 0.25))
    with pytest.raises(nn.LayoutMismatch):
        NetEstimator(net)
    tanh = nn.build(nn.default_topology(MOVE_GROUPS, "tanh", 0.25))
    with pytest.raises(ValueError):
        NetEstimator(tanh)


class _Rec:
    def __init__(self, position, best_move):
        self.position, self.best_move = position, best_move


def test_rank_histogram_and_topk():
    p = Position.start()
    moves = p.legal_moves()

    def prefers_first(pos, ms):
        return {m: (2.0 if i == 0 else 1.0) / (len(ms) + 1) for i, m in enumerate(ms)}

    recs = [_Rec(p, moves[0]), _Rec(p, moves[5])]
    assert rank_histogram(prefers_first, recs) == [0, 5]
    assert top_k_accuracy(prefers_first, recs, 1) == 0.5
    assert top_k_accuracy(prefers_first, recs, 6) == 1.0
    with pytest.raises(ValueError):
        rank_histogram(prefers_first, [_Rec(p, parse_uci(p.apply(moves[0]), "e7e5"))])


def test_predicted_rank_ties_keep_order():
    p = Position.start()
    moves = p.legal_moves()
    d = UniformEstimator()(p, moves)
    assert [predicted_rank(d, m) for m in moves] == list(range(20))
