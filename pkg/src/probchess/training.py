"""Learning pipeline: corpora, material bootstrap, TD-Leaf self-play, move network.

Game records are plain text, one game per line, as space-separated UCI moves
from the standard start position. Metrics are streamed as JSON lines.
"""

from __future__ import annotations

import json
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import neuralnet as nn
from .chesscore import (FenError, GameState, Move, Position, game_state,
                        material_balance, parse_uci)
from .engine import NetEvaluator
from .features import NUM_FEATURES, extract, extract_many
from .probestimator import (MOVE_GROUPS, MOVE_INPUT_WIDTH, RANK_INDEX, UniformEstimator,
                            move_blocks, rank_features)
from .search import (MATERIAL_SCALE, SearchLimits, Searcher, pv_leaf,
                     score_to_float)

log = logging.getLogger(__name__)

SAMPLED_GAME = "sampled-game"
RANDOM_MOVE_PERTURBED = "random-move-perturbed"
INTERNAL_NODE = "internal-node"
PROVENANCES = (SAMPLED_GAME, RANDOM_MOVE_PERTURBED, INTERNAL_NODE)

TRACE_PLIES = 12
TD_LAMBDA = 0.7
TD_BATCH = 256


@dataclass
class TrainingPosition:
    position: Position
    provenance: str
    source: Optional[Position] = None  # position the random move was applied to

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass
class LabeledMoveRecord:
    position: Position
    best_move: Move
    moves: list = field(default_factory=list)

    def __post_init__(self):
        if not self.moves:
            self.moves = self.position.legal_moves()
        if self.best_move not in self.moves:
            raise ValueError(f"best move {self.best_move} is not legal")


@dataclass
class TdTrace:
    """Scores of consecutive self-play searches, all from the perspective of
    the side to move at the trace's first position.

    ``signs[i]`` maps the evaluator's output at ``leaves[i]`` to that
    perspective; 0 marks a fixed score (terminal leaf) that carries no gradient.
    """

    scores: list
    leaves: list
    signs: list

    def __post_init__(self):
        if len(self.scores) > TRACE_PLIES:
            raise ValueError(f"traces hold at most {TRACE_PLIES} scores")
        if not len(self.scores) == len(self.leaves) == len(self.signs):
            raise ValueError("scores, leaves and signs must align")

    @property
    def differences(self) -> list:
        return [b - a for a, b in zip(self.scores, self.scores[1:])]

    def features(self) -> np.ndarray:
        return extract_many(self.leaves) if self.leaves else np.zeros((0, NUM_FEATURES), np.float32)


# -- game records ------------------------------------------------------------

class ParsedGames(NamedTuple):
    games: list  # per game, the positions before each move and after the last one
    skipped: int


def parse_game(line: str) -> list:
    """Positions along a game record; raises ValueError on an illegal move."""
    pos = Position.start()
    out = [pos]
    for tok in line.split():
        pos = pos.apply(parse_uci(pos, tok))
        out.append(pos)
    return out


def read_games(lines: Iterable[str]) -> ParsedGames:
    games, skipped = [], 0
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            games.append(parse_game(line))
        except (ValueError, FenError) as exc:
            skipped += 1
            log.debug("game record %d skipped: %s", n, exc)
    if skipped:
        log.info("skipped %d unparseable game records", skipped)
    return ParsedGames(games, skipped)


def write_games(path, games: Iterable[list]) -> None:
    with open(path, "w") as fh:
        for moves in games:
            fh.write(" ".join(m if isinstance(m, str) else m.uci() for m in moves) + "\n")


def synthesize_games(n: int, rng: random.Random, max_plies: int = 160,
                     random_rate: float = 0.25, nodes: int = 300) -> list:
    """Cheap self-play stand-in for a game database.

    Each move is uniformly random with probability ``random_rate``; otherwise
    it comes from a shallow material-only search capped at ``nodes`` nodes.
    Returns move lists as UCI strings.
    """
    from .search import material_evaluator
    searcher = Searcher(material_evaluator, tt_size=1 << 12)
    limits = SearchLimits.depth_limited(2, nodes=nodes)
    out = []
    for _ in range(n):
        pos, moves_played = Position.start(), []
        searcher.new_game()
        for _ in range(max_plies):
            if game_state(pos).is_terminal:
                break
            if rng.random() < random_rate:
                m = rng.choice(pos.legal_moves())
            else:
                m = searcher.search(pos, limits).best_move
            moves_played.append(m.uci())
            pos = pos.apply(m)
        out.append(moves_played)
    return out


# -- evaluation corpus -------------------------------------------------------

def generate_eval_corpus(games, target: int, rng: random.Random,
                         max_attempts_factor: int = 20) -> list:
    """Sample ``target`` positions uniformly over (game, ply) pairs, then play
    one random legal move in each. ``games`` is a ParsedGames or text lines."""
    if target < 1:
        raise ValueError("target count must be at least 1")
    if not isinstance(games, ParsedGames):
        games = read_games(games)
    pairs = [(g, i) for g, game in enumerate(games.games) for i in range(len(game))]
    if not pairs:
        raise ValueError("game source holds no positions")
    out, attempts = [], 0
    while len(out) < target:
        attempts += 1
        if attempts > max_attempts_factor * target:
            raise RuntimeError("could not draw enough non-terminal positions")
        g, i = rng.choice(pairs)
        src = games.games[g][i]
        moves = src.legal_moves()
        if not moves or game_state(src).is_terminal:
            continue
        child = src.apply(rng.choice(moves))
        if game_state(child).is_terminal:
            continue
        out.append(TrainingPosition(child, RANDOM_MOVE_PERTURBED, src))
    return out


def material_imbalance(p: Position) -> int:
    return abs(material_balance(p))


# -- material bootstrap ------------------------------------------------------

def material_target(p: Position) -> float:
    """tanh(material / MATERIAL_SCALE) from the side to move's view."""
    return math.tanh(p.turn * material_balance(p) / MATERIAL_SCALE)


@dataclass
class BootstrapConfig:
    batch_size: int = 64
    max_epochs: int = 200
    min_epochs: int = 10
    target_correlation: float = 0.9
    holdout: float = 0.1
    seed: int = 0


class BootstrapFailed(RuntimeError):
    pass


def bootstrap_material(net: nn.Network, positions, rng: random.Random | None = None,
                       config: BootstrapConfig | None = None) -> tuple:
    """Regress ``net`` onto material_target over ``positions`` (L2, AdaDelta).

    Trains at least ``min_epochs`` and stops once the held-out correlation
    reaches the target. Returns ``(net, metrics)``; raises BootstrapFailed if
    ``max_epochs`` pass without reaching it.
    """
    config = config or BootstrapConfig()
    rng = rng or random.Random(config.seed)
    pos = [tp.position if isinstance(tp, TrainingPosition) else tp for tp in positions]
    if len(pos) < 10:
        raise ValueError("bootstrap needs at least 10 positions")
    X = extract_many(pos)
    y = np.array([material_target(p) for p in pos], dtype=np.float64)
    order = list(range(len(pos)))
    rng.shuffle(order)
    n_hold = max(2, int(len(pos) * config.holdout))
    hold, train = np.array(order[:n_hold]), np.array(order[n_hold:])
    state = nn.make_optimizer(net, "adadelta")
    nprng = np.random.default_rng(rng.getrandbits(32))
    history = []
    for epoch in range(1, config.max_epochs + 1):
        perm = nprng.permutation(train)
        for k in range(0, len(perm), config.batch_size):
            idx = perm[k:k + config.batch_size]
            pred = net.forward_batch(X[idx])
            _, grad = nn.l2_loss(pred, y[idx])
            nn.step(net, state, net.backward_batch(X[idx], grad / len(idx)))
        corr = _correlation(net.forward_batch(X[hold]), y[hold])
        history.append({"epoch": epoch, "heldout_correlation": corr})
        if epoch >= config.min_epochs and corr >= config.target_correlation:
            return net, {"epochs": epoch, "correlation": corr, "history": history,
                         "train_correlation": _correlation(net.forward_batch(X[train]), y[train])}
    raise BootstrapFailed(f"correlation {corr:.3f} below {config.target_correlation} "
                          f"after {config.max_epochs} epochs")


def _correlation(a, b) -> float:
    a, b = np.asarray(a, np.float64), np.asarray(b, np.float64)
    if a.std() == 0 or b.std() == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


# -- TD-Leaf(lambda) -----------------------------------------------------------

def tdleaf_contributions(scores, lam: float = TD_LAMBDA) -> list:
    """Per-step weighted changes for the trace's first position.

    Entry ``k`` (k >= 1) is ``(s_k - s_{k-1}) * lam**k``; entry 0 is 0.
    """
    _check_lambda(lam)
    out = [0.0] * len(scores)
    for k in range(1, len(scores)):
        out[k] = (scores[k] - scores[k - 1]) * lam ** k
    return out


def tdleaf_error(scores, lam: float = TD_LAMBDA) -> list:
    """λ-weighted temporal-difference error for every start index ``t``:

        e_t = sum_{k > t} lam**(k - t) * (s_k - s_{k-1})

    so that ``e_0`` is the sum of tdleaf_contributions. Shorter than two
    scores gives all-zero errors.
    """
    _check_lambda(lam)
    n = len(scores)
    errors = [0.0] * n
    acc = 0.0
    # e_t = lam * (d_{t+1} + e_{t+1}), with d_{k} = s_k - s_{k-1}
    for t in range(n - 2, -1, -1):
        acc = lam * ((scores[t + 1] - scores[t]) + acc)
        errors[t] = acc
    return errors


def _check_lambda(lam: float):
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")


@dataclass
class TdConfig:
    batch_size: int = TD_BATCH
    plies: int = TRACE_PLIES
    lam: float = TD_LAMBDA
    alpha: float = 1.0  # AdaDelta learning rate
    nodes: int = 1000
    threshold: float = 1e-4
    first_only: bool = False  # update only the trace's first position
    workers: int = 1
    tt_size: int = 1 << 14


def _fixed_score(pos: Position) -> Optional[float]:
    """Score of a terminal position for its side to move, else None."""
    state = game_state(pos)
    if state == GameState.CHECKMATE:
        return -1.0
    if state.is_draw:
        return 0.0
    return None


def self_play_trace(evaluate, start: Position, config: TdConfig,
                    searcher: Searcher | None = None) -> TdTrace:
    """Play up to ``config.plies`` searched moves from ``start``.

    Each score is the search's value mapped to the start player's view; the
    leaf recorded is the end of the PV. A terminal position ends the trace
    with its fixed score.
    """
    searcher = searcher or Searcher(evaluate, tt_size=config.tt_size)
    searcher.new_game()
    limits = SearchLimits.probability_limited(config.threshold, nodes=config.nodes)
    scores, leaves, signs = [], [], []
    pos, persp = start, 1
    for _ in range(config.plies):
        fixed = _fixed_score(pos)
        if fixed is not None:
            scores.append(persp * fixed)
            leaves.append(pos)
            signs.append(0)
            break
        result = searcher.search(pos, limits)
        leaf = pv_leaf(pos, result.pv)
        scores.append(persp * score_to_float(result.score))
        leaves.append(leaf)
        # the gradient belongs to the leaf only if its evaluation is the score
        flip = (-1) ** len(result.pv)
        attributable = (not result.is_mate and _fixed_score(leaf) is None
                        and flip * searcher.static_eval(leaf) == result.score)
        signs.append(persp * flip if attributable else 0)
        pos = pos.apply(result.best_move)
        persp = -persp
    return TdTrace(scores, leaves, signs)


def tdleaf_gradient(net: nn.Network, traces, lam: float = TD_LAMBDA,
                    first_only: bool = False) -> tuple:
    """Summed L1-style gradient over all traces.

    For every start ``t`` the leaf output is pulled toward ``J + e_t``:
    the loss |J - (J + e_t)| has slope ``-sign(e_t)`` with respect to J,
    mapped through the leaf's sign. Returns ``(gradients, errors)``.
    """
    rows, upstream, errors = [], [], []
    for tr in traces:
        e = tdleaf_error(tr.scores, lam)
        starts = range(min(1, len(e))) if first_only else range(len(e))
        for t in starts:
            errors.append(e[t])
            if tr.signs[t] == 0 or e[t] == 0.0:
                continue
            rows.append(extract(tr.leaves[t]))
            upstream.append(-math.copysign(1.0, e[t]) * tr.signs[t])
    if not rows:
        return net.zero_gradients(), errors
    g = net.backward_batch(np.array(rows, dtype=np.float32), np.array(upstream))
    return g, errors


def _trace_worker(args):
    net, positions, config = args
    evaluate = NetEvaluator(net)
    searcher = Searcher(evaluate, tt_size=config.tt_size)
    out, failed = [], 0
    for p in positions:
        try:
            out.append(self_play_trace(evaluate, p, config, searcher))
        except Exception as exc:  # a failed search skips the position
            log.warning("self-play failed: %s", exc)
            failed += 1
    return out, failed


def play_traces(net: nn.Network, positions: list, config: TdConfig) -> tuple:
    """Self-play every position against a frozen snapshot of ``net``."""
    snapshot = net.copy()
    if config.workers <= 1 or len(positions) < 2:
        return _trace_worker((snapshot, positions, config))
    chunks = [positions[i::config.workers] for i in range(config.workers)]
    traces, failed = [], 0
    with ProcessPoolExecutor(config.workers) as pool:
        for tr, f in pool.map(_trace_worker, [(snapshot, c, config) for c in chunks if c]):
            traces.extend(tr)
            failed += f
    return traces, failed


def tdleaf_iteration(net: nn.Network, state: nn.OptimizerState, corpus: list,
                     config: TdConfig, rng: random.Random) -> dict:
    """One batch: self-play, sum gradients, one optimiser step. Updates ``net`` in place."""
    batch = [tp.position if isinstance(tp, TrainingPosition) else tp
             for tp in rng.sample(corpus, min(config.batch_size, len(corpus)))]
    started = time.perf_counter()
    traces, failed = play_traces(net, batch, config)
    g, errors = tdleaf_gradient(net, traces, config.lam, config.first_only)
    before = [w.copy() for w in net.parameters()]
    nn.step(net, state, g)
    update = math.sqrt(sum(float(np.sum((a - b).astype(np.float64) ** 2))
                           for a, b in zip(net.parameters(), before)))
    mean_abs = float(np.mean(np.abs(errors))) if errors else 0.0
    if not math.isfinite(mean_abs):
        raise nn.TrainingDivergence("non-finite TD error")
    first = [tdleaf_error(t.scores, config.lam)[0] for t in traces if t.scores]
    return {"positions": len(batch), "traces": len(traces), "failed": failed,
            "mean_abs_error": mean_abs,
            "mean_abs_first_error": float(np.mean(np.abs(first))) if first else 0.0,
            "gradient_norm": g.norm(), "update_norm": update,
            "seconds": time.perf_counter() - started}


def train_eval(net: nn.Network, corpus: list, iterations: int, config: TdConfig,
               rng: random.Random, log_path=None, sts_records=None, sts_every: int = 0,
               sts_nodes: int = 1000, state: nn.OptimizerState | None = None) -> list:
    """Run ``iterations`` TD-Leaf batches, streaming metrics as JSON lines.

    With ``sts_records`` and ``sts_every > 0`` the suite is scored before the
    first iteration and every ``sts_every`` iterations.
    """
    from .evalharness import run_sts  # deferred: evalharness imports the engine

    state = state or nn.make_optimizer(net, "adadelta", lr=config.alpha)
    fh = open(log_path, "a") if log_path else None
    history = []

    def emit(rec):
        history.append(rec)
        if fh:
            fh.write(json.dumps(rec) + "\n")
            fh.flush()

    def sts_score():
        return run_sts(NetEvaluator(net), sts_records, nodes=sts_nodes).total

    try:
        if sts_records and sts_every > 0:
            emit({"iteration": 0, "sts_score": sts_score()})
        for it in range(1, iterations + 1):
            rec = {"iteration": it, **tdleaf_iteration(net, state, corpus, config, rng)}
            if sts_records and sts_every > 0 and it % sts_every == 0:
                rec["sts_score"] = sts_score()
            emit(rec)
    finally:
        if fh:
            fh.close()
    return history


# -- move-network corpora ----------------------------------------------------

def generate_internal_corpus(roots, limits: SearchLimits, sample_rate: float,
                             rng: random.Random, evaluate, capacity: int = 100_000) -> list:
    """Reservoir-sample internal search nodes (not the root, leaves or qsearch)."""
    if not 0.0 <= sample_rate <= 1.0:
        raise ValueError("sample rate must lie in [0, 1]")
    reservoir, seen = [], 0
    if sample_rate == 0.0:
        return reservoir
    searcher = Searcher(evaluate)

    def on_node(kind, pos, ply, budget):
        nonlocal seen
        if kind != "internal" or ply == 0 or rng.random() >= sample_rate:
            return
        seen += 1
        if len(reservoir) < capacity:
            reservoir.append(pos)
        else:
            j = rng.randrange(seen)
            if j < capacity:
                reservoir[j] = pos

    searcher.on_node = on_node
    for root in roots:
        root = root.position if isinstance(root, TrainingPosition) else root
        if game_state(root).is_terminal:
            continue
        searcher.new_game()
        searcher.search(root, limits)
    return [TrainingPosition(p, INTERNAL_NODE) for p in reservoir
            if not game_state(p).is_terminal]


def label_best_moves(positions, limits: SearchLimits, evaluate) -> list:
    """Best move for each non-terminal position by a uniform-estimator search."""
    searcher = Searcher(evaluate, UniformEstimator())
    out = []
    for p in positions:
        p = p.position if isinstance(p, TrainingPosition) else p
        if game_state(p).is_terminal:
            continue
        searcher.new_game()
        result = searcher.search(p, limits)
        out.append(LabeledMoveRecord(p, result.best_move))
    return out


def save_records(path, records) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({"fen": r.position.fen(), "best": r.best_move.uci()}) + "\n")


def load_records(path) -> list:
    from .chesscore import parse_fen
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                p = parse_fen(d["fen"])
                out.append(LabeledMoveRecord(p, parse_uci(p, d["best"])))
    return out


def save_positions(path, positions) -> None:
    with open(path, "w") as fh:
        for tp in positions:
            fh.write(json.dumps({"fen": tp.position.fen(), "provenance": tp.provenance}) + "\n")


def load_positions(path) -> list:
    from .chesscore import parse_fen
    with open(path) as fh:
        return [TrainingPosition(parse_fen(d["fen"]), d["provenance"])
                for d in map(json.loads, filter(str.strip, fh))]


# -- move network training ---------------------------------------------------

@dataclass
class MoveNetConfig:
    epochs: int = 10
    batch_size: int = 256
    holdout: float = 0.1
    seed: int = 0
    scale: float = 1.0  # hidden-layer width multiplier


class MoveExamples(NamedTuple):
    """Records expanded into one row per (position, legal move)."""

    position_features: np.ndarray  # (records, NUM_FEATURES)
    move_features: np.ndarray  # (moves, MOVE_BLOCK_WIDTH), rank column refreshed per epoch
    record_index: np.ndarray  # (moves,) owning record
    targets: np.ndarray  # (moves,) 1 for the labelled best move
    offsets: np.ndarray  # (records + 1,) move rows of record i are offsets[i]:offsets[i+1]

    def rows(self, idx) -> np.ndarray:
        return np.hstack([self.position_features[self.record_index[idx]], self.move_features[idx]])


def expand_records(records) -> MoveExamples:
    pf = extract_many([r.position for r in records])
    blocks, rec_idx, targets, offsets = [], [], [], [0]
    for i, r in enumerate(records):
        blocks.append(move_blocks(r.moves))
        rec_idx.extend([i] * len(r.moves))
        targets.extend(1.0 if m == r.best_move else 0.0 for m in r.moves)
        offsets.append(offsets[-1] + len(r.moves))
    mf = np.vstack(blocks) if blocks else np.zeros((0, MOVE_INPUT_WIDTH - NUM_FEATURES), np.float32)
    return MoveExamples(pf, mf, np.array(rec_idx, dtype=np.int64),
                        np.array(targets, dtype=np.float64), np.array(offsets, dtype=np.int64))


def refresh_ranks(net: nn.Network, ex: MoveExamples) -> np.ndarray:
    """Set every rank feature to its two-pass inference value; returns second-pass scores."""
    col = RANK_INDEX - NUM_FEATURES
    scores = np.empty(len(ex.targets))
    ex.move_features[:, col] = 0.0
    first = _batched_forward(net, ex, np.arange(len(ex.targets)))
    for i in range(len(ex.offsets) - 1):
        a, b = ex.offsets[i], ex.offsets[i + 1]
        ex.move_features[a:b, col] = rank_features(first[a:b])
    scores[:] = _batched_forward(net, ex, np.arange(len(ex.targets)))
    return scores


def _batched_forward(net, ex: MoveExamples, idx, chunk: int = 4096) -> np.ndarray:
    return np.concatenate([net.forward_batch(ex.rows(idx[k:k + chunk]))
                           for k in range(0, len(idx), chunk)]) if len(idx) else np.zeros(0)


def topk_from_scores(ex: MoveExamples, scores: np.ndarray, ks=(1, 3)) -> dict:
    """Top-k accuracy of the labelled move under descending ``scores``."""
    hits = {k: 0 for k in ks}
    n = len(ex.offsets) - 1
    for i in range(n):
        a, b = ex.offsets[i], ex.offsets[i + 1]
        s, t = scores[a:b], ex.targets[a:b]
        best = int(np.argmax(t))
        rank = int(np.sum(s > s[best]) + np.sum(s[:best] == s[best]))
        for k in ks:
            hits[k] += rank < k
    return {k: hits[k] / n for k in ks} if n else {k: 0.0 for k in ks}


def train_movenet(records: list, config: MoveNetConfig | None = None,
                  net: nn.Network | None = None, log_path=None) -> tuple:
    """Cross-entropy training of a logistic move network.

    Returns ``(net, metrics)``; metrics carry held-out top-1/top-3 accuracy
    per epoch and the uniform baselines 1/n and 3/n of the held-out set.
    """
    if not records:
        raise ValueError("no training records")
    config = config or MoveNetConfig()
    rng = random.Random(config.seed)
    if net is None:
        net = nn.build(nn.default_topology(MOVE_GROUPS, "logistic", config.scale), seed=config.seed)
    order = list(range(len(records)))
    rng.shuffle(order)
    n_hold = int(round(len(records) * config.holdout)) if len(records) > 1 else 0
    held = [records[i] for i in order[:n_hold]]
    train = [records[i] for i in order[n_hold:]]
    tr_ex, ho_ex = expand_records(train), expand_records(held)
    mean_moves = float(np.mean([len(r.moves) for r in held])) if held else float("nan")
    metrics = {"records": len(records), "train_records": len(train), "heldout_records": len(held),
               "train_examples": len(tr_ex.targets), "positives": int(tr_ex.targets.sum()),
               "heldout_mean_moves": mean_moves,
               "uniform_top1": 1.0 / mean_moves if held else None,
               "uniform_top3": 3.0 / mean_moves if held else None,
               "epochs": []}
    state = nn.make_optimizer(net, "adadelta")
    nprng = np.random.default_rng(config.seed)
    fh = open(log_path, "a") if log_path else None
    try:
        for epoch in range(1, config.epochs + 1):
            refresh_ranks(net, tr_ex)
            perm = nprng.permutation(len(tr_ex.targets))
            total = 0.0
            for k in range(0, len(perm), config.batch_size):
                idx = perm[k:k + config.batch_size]
                X = tr_ex.rows(idx)
                pred = net.forward_batch(X)
                loss, _ = nn.cross_entropy_loss(pred, tr_ex.targets[idx])
                total += float(np.sum(loss))
                g = nn.cross_entropy_logit_grad(pred, tr_ex.targets[idx]) / len(idx)
                grads = net.backward_batch(X, g, pre_activation=True)
                if not grads.is_finite():
                    path = _dump_state(net)
                    raise nn.TrainingDivergence(f"non-finite gradient at epoch {epoch}; state in {path}")
                nn.step(net, state, grads)
            rec = {"epoch": epoch, "train_loss": total / max(len(perm), 1)}
            if held:
                acc = topk_from_scores(ho_ex, refresh_ranks(net, ho_ex))
                rec.update(heldout_top1=acc[1], heldout_top3=acc[3])
            metrics["epochs"].append(rec)
            if fh:
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
    finally:
        if fh:
            fh.close()
    if metrics["epochs"] and held:
        metrics["heldout_top1"] = metrics["epochs"][-1]["heldout_top1"]
        metrics["heldout_top3"] = metrics["epochs"][-1]["heldout_top3"]
    return net, metrics


def _dump_state(net: nn.Network) -> str:
    import tempfile
    fd, path = tempfile.mkstemp(prefix="movenet-diverged-", suffix=".pcnn")
    with open(fd, "wb") as fh:
        fh.write(nn.dumps(net))
    return path
