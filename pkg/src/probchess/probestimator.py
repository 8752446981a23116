"""Estimates of P(child | parent) over the legal moves of a position.

The network estimator scores every move twice. The first pass treats each
move as if it were ranked best (rank feature 0). Moves are then ranked by
their first-pass scores, and the second pass is scored with the real rank
ordinal/(n-1). The second-pass logistic outputs are normalised by their sum.
"""

from __future__ import annotations

import numpy as np

from .chesscore import BISHOP, KNIGHT, QUEEN, ROOK, Move, Position
from .features import LAYOUT, NUM_FEATURES, extract
from .neuralnet import LayoutMismatch, Network

# piece one-hot (6), from x/y, to x/y, promotion one-hot (none, N, B, R, Q), rank
MOVE_BLOCK_WIDTH = 6 + 2 + 2 + 5 + 1
MOVE_GROUPS = LAYOUT.groups + (("move", MOVE_BLOCK_WIDTH),)
MOVE_INPUT_WIDTH = NUM_FEATURES + MOVE_BLOCK_WIDTH
RANK_INDEX = MOVE_INPUT_WIDTH - 1
_PROMO_COLUMN = {0: 0, KNIGHT: 1, BISHOP: 2, ROOK: 3, QUEEN: 4}

# Consult the network only where roughly this many nodes remain below.
DEFAULT_GATE = 100.0


def move_block(m: Move, rank: float = 0.0) -> np.ndarray:
    v = np.zeros(MOVE_BLOCK_WIDTH, dtype=np.float32)
    _fill_move_block(v, m, rank)
    return v


def _fill_move_block(v, m: Move, rank: float):
    v[m.piece - 1] = 1.0
    v[6] = (m.from_sq & 7) / 7.0
    v[7] = (m.from_sq >> 3) / 7.0
    v[8] = (m.to_sq & 7) / 7.0
    v[9] = (m.to_sq >> 3) / 7.0
    v[10 + _PROMO_COLUMN[m.promotion]] = 1.0
    v[15] = rank


def move_blocks(moves) -> np.ndarray:
    out = np.zeros((len(moves), MOVE_BLOCK_WIDTH), dtype=np.float32)
    for row, m in zip(out, moves):
        _fill_move_block(row, m, 0.0)
    return out


def move_feature_matrix(position_features: np.ndarray, moves) -> np.ndarray:
    """Rows ``[position features | move block]`` with the rank column at 0."""
    X = np.empty((len(moves), MOVE_INPUT_WIDTH), dtype=np.float32)
    X[:, :NUM_FEATURES] = position_features
    X[:, NUM_FEATURES:] = move_blocks(moves)
    return X


def rank_features(scores: np.ndarray) -> np.ndarray:
    """ordinal/(n-1) of each entry in descending-score order (ties by index)."""
    n = len(scores)
    ranks = np.zeros(n, dtype=np.float32)
    if n > 1:
        order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
        ranks[order] = np.arange(n, dtype=np.float32) / (n - 1)
    return ranks


def estimate_uniform(p: Position, moves) -> dict:
    if not moves:
        raise ValueError("cannot build a distribution over zero moves")
    share = 1.0 / len(moves)
    return {m: share for m in moves}


def check_layout(net: Network) -> None:
    if net.topology.groups != MOVE_GROUPS:
        raise LayoutMismatch(f"move network expects {net.topology.groups}, "
                             f"estimator provides {MOVE_GROUPS}")


def two_pass_scores(net: Network, X: np.ndarray) -> tuple:
    """Run both passes over a move feature matrix (modified in place).

    Returns ``(first_pass, second_pass)`` raw outputs.
    """
    X[:, RANK_INDEX] = 0.0
    first = net.forward_batch(X)
    X[:, RANK_INDEX] = rank_features(first)
    second = net.forward_batch(X)
    return first, second


def estimate_net(p: Position, moves, net: Network) -> dict:
    check_layout(net)
    if not moves:
        raise ValueError("cannot build a distribution over zero moves")
    if len(moves) == 1:
        return {moves[0]: 1.0}
    X = move_feature_matrix(extract(p), moves)
    _, scores = two_pass_scores(net, X)
    return _normalise(moves, scores.astype(np.float64))


def _normalise(moves, scores: np.ndarray) -> dict:
    total = float(scores.sum())
    if total < 1e-12:
        share = 1.0 / len(moves)
        return {m: share for m in moves}
    probs = scores / total
    return dict(zip(moves, probs.tolist()))


class UniformEstimator:
    is_uniform = True
    min_budget_ratio = 0.0

    def __call__(self, p: Position, moves) -> dict:
        return estimate_uniform(p, moves)


class NetEstimator:
    """Callable estimator backed by a logistic-head move network.

    Used by the search only where ``budget / threshold >= min_budget_ratio``.
    """

    is_uniform = False

    def __init__(self, net: Network, min_budget_ratio: float = DEFAULT_GATE):
        check_layout(net)
        if net.head != "logistic":
            raise ValueError("move network needs a logistic output")
        self.net = net
        self.min_budget_ratio = min_budget_ratio

    def __call__(self, p: Position, moves) -> dict:
        return estimate_net(p, moves, self.net)


def predicted_rank(dist: dict, move: Move) -> int:
    """Position of ``move`` when the distribution is sorted by descending
    probability (ties keep move-list order)."""
    ordered = sorted(dist, key=lambda m: -dist[m])
    return ordered.index(move)


def rank_histogram(estimator, records) -> list:
    """Predicted rank of the labelled best move for every record.

    ``records`` yield objects with ``position`` and ``best_move``;
    ``estimator`` is a Network or a ``(position, moves) -> dict`` callable.
    """
    if isinstance(estimator, Network):
        estimator = NetEstimator(estimator)
    ranks = []
    for i, rec in enumerate(records):
        moves = rec.position.legal_moves()
        if rec.best_move not in moves:
            raise ValueError(f"record {i}: best move {rec.best_move} is not legal")
        ranks.append(predicted_rank(estimator(rec.position, moves), rec.best_move))
    return ranks


def top_k_accuracy(estimator, records, k: int) -> float:
    ranks = rank_histogram(estimator, records)
    if not ranks:
        raise ValueError("no records")
    return sum(r < k for r in ranks) / len(ranks)
