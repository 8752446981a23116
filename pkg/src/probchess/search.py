"""Negamax alpha-beta search with depth-limited and probability-limited regimes.

In the probability regime every node carries the estimated probability of
lying on the principal variation. A node's probability is split among its
children by the move-probability estimator, and a node is expanded only while
its probability is strictly greater than the threshold. Nodes below the budget
fall through to quiescence search.

Scores are integers from the side to move's point of view: evaluator output
in (-1, 1) times ``EVAL_SCALE``; mate scores live above ``MATE_BOUND``.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .chesscore import KING, QUEEN, Move, Position, is_attacked

EVAL_SCALE = 10_000
MATE = 100_000
MATE_BOUND = MATE - 1_000
INF = 1_000_000
MAX_PLY = 128
MAX_QPLY = 32

DEPTH = "depth"
PROBABILITY = "probability"

DEFAULT_THRESHOLD = 1e-7
TIGHTENING_FACTOR = 35.0
# Relative slack when comparing probabilities, so that b**-d computed along a
# path and b**-d computed directly are treated as equal.
_PROB_RTOL = 1e-9

EXACT, LOWER, UPPER = 0, 1, 2

PIECE_VALUES = (0, 1, 3, 3, 5, 9, 100)


@dataclass
class SearchLimits:
    regime: str = PROBABILITY
    depth: Optional[int] = None
    threshold: Optional[float] = None
    nodes: Optional[int] = None
    time_ms: Optional[float] = None
    iterative: bool = True

    def __post_init__(self):
        if self.regime == DEPTH:
            if self.depth is None or self.depth < 0:
                raise ValueError("depth regime needs a non-negative depth")
            if self.threshold is not None:
                raise ValueError("depth regime takes no probability threshold")
        elif self.regime == PROBABILITY:
            if self.threshold is None:
                self.threshold = DEFAULT_THRESHOLD
            if not 0.0 < self.threshold < 1.0:
                raise ValueError("probability threshold must lie in (0, 1)")
            if self.depth is not None:
                raise ValueError("probability regime takes no depth")
        else:
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def depth_limited(cls, depth: int, **kw) -> "SearchLimits":
        return cls(regime=DEPTH, depth=depth, **kw)

    @classmethod
    def probability_limited(cls, threshold: float = DEFAULT_THRESHOLD, **kw) -> "SearchLimits":
        return cls(regime=PROBABILITY, threshold=threshold, **kw)

    def schedule(self) -> list:
        """Root budgets for each iteration; the last one is the requested budget."""
        if self.regime == DEPTH:
            return list(range(1, self.depth + 1)) if self.iterative and self.depth > 0 else [self.depth]
        if not self.iterative:
            return [self.threshold]
        out, t = [], 1.0 / TIGHTENING_FACTOR
        while t > self.threshold * (1 + _PROB_RTOL):
            out.append(t)
            t /= TIGHTENING_FACTOR
        out.append(self.threshold)
        return out


@dataclass
class SearchResult:
    score: int
    pv: list
    nodes: int
    max_ply: int
    completed: bool
    iterations: int = 0
    elapsed: float = 0.0

    @property
    def best_move(self) -> Optional[Move]:
        return self.pv[0] if self.pv else None

    @property
    def is_mate(self) -> bool:
        return abs(self.score) > MATE_BOUND

    @property
    def mate_in(self) -> Optional[int]:
        """Moves to mate (negative when being mated), or None."""
        if not self.is_mate:
            return None
        plies = MATE - abs(self.score)
        moves = (plies + 1) // 2
        return moves if self.score > 0 else -moves


@dataclass
class Window:
    lowerbound: int
    upperbound: int

    def __post_init__(self):
        if not self.lowerbound < self.upperbound:
            raise ValueError("window lowerbound must be below upperbound")


class TranspositionEntry:
    __slots__ = ("key", "budget", "score", "bound", "move")

    def __init__(self, key: int, budget: float, score: int, bound: int, move: Optional[Move]):
        self.key = key
        self.budget = budget
        self.score = score
        self.bound = bound
        self.move = move

    def __repr__(self):
        return (f"TranspositionEntry(key={self.key:#x}, budget={self.budget}, score={self.score}, "
                f"bound={self.bound}, move={self.move})")


class TranspositionTable:
    """Fixed-capacity, one entry per slot.

    ``budget`` measures how thorough the stored search was (remaining depth,
    or node probability divided by threshold); larger is more thorough and
    wins the slot.
    """

    def __init__(self, capacity: int = 1 << 16):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.slots = [None] * capacity

    def clear(self):
        self.slots = [None] * self.capacity

    def probe(self, key: int) -> Optional[TranspositionEntry]:
        e = self.slots[key % self.capacity]
        return e if e is not None and e.key == key else None

    def store(self, entry: TranspositionEntry) -> bool:
        i = entry.key % self.capacity
        old = self.slots[i]
        if old is None or old.key == entry.key or entry.budget >= old.budget:
            self.slots[i] = entry
            return True
        return False


def _to_tt(score: int, ply: int) -> int:
    if score > MATE_BOUND:
        return score + ply
    if score < -MATE_BOUND:
        return score - ply
    return score


def _from_tt(score: int, ply: int) -> int:
    if score > MATE_BOUND:
        return score - ply
    if score < -MATE_BOUND:
        return score + ply
    return score


def order_moves(p: Position, moves, tt_move: Optional[Move] = None, probs: Optional[dict] = None) -> list:
    """Search order: tt-move, then by estimator probability when given, else
    winning captures (MVV/LVA), queen promotions, remaining moves as generated."""
    if probs is not None:
        ordered = sorted(moves, key=lambda m: -probs[m])
    else:
        winning, promos, rest = [], [], []
        them = -p.turn
        for m in moves:
            if m.captured:
                victim, attacker = PIECE_VALUES[m.captured], PIECE_VALUES[m.piece]
                if victim >= attacker or m.piece == KING or not is_attacked(p.board, m.to_sq, them):
                    winning.append(m)
                    continue
                rest.append(m)
            elif m.promotion == QUEEN:
                promos.append(m)
            else:
                rest.append(m)
        winning.sort(key=lambda m: (-PIECE_VALUES[m.captured], PIECE_VALUES[m.piece]))
        ordered = winning + promos + rest
    if tt_move is not None and tt_move in moves:
        ordered.remove(tt_move)
        ordered.insert(0, tt_move)
    return ordered


def _qsearch_order(moves) -> list:
    q = [m for m in moves if m.captured or m.promotion == QUEEN]
    q.sort(key=lambda m: (-PIECE_VALUES[m.captured] - (8 if m.promotion == QUEEN else 0),
                          PIECE_VALUES[m.piece]))
    return q


def _is_draw_by_rule(pos) -> bool:
    return pos.draw_by_rule()


class SearchStopped(Exception):
    pass


class Searcher:
    """Reusable search instance.

    ``evaluate(position) -> float`` in (-1, 1) from the side to move's view.
    ``estimator(position, moves) -> {move: probability}``; ``None`` means
    uniform. An estimator may define ``min_budget_ratio``: it is consulted only
    at nodes whose probability is at least that multiple of the threshold,
    the uniform split being used below it.
    """

    def __init__(self, evaluate: Callable, estimator=None, tt_size: int = 1 << 16,
                 use_tt: bool = True, alpha_beta: bool = True, quiescence: bool = True,
                 poll_interval: int = 128):
        self.evaluate = evaluate
        self.estimator = None if getattr(estimator, "is_uniform", False) else estimator
        self.tt = TranspositionTable(tt_size) if use_tt and alpha_beta else None
        self.alpha_beta = alpha_beta
        self.quiescence = quiescence
        self.poll_interval = poll_interval
        self.stop_event = threading.Event()
        # Instrumentation hooks.
        self.on_node: Optional[Callable] = None  # (kind, pos, ply, budget)
        self.on_expand: Optional[Callable] = None  # (pos, budget, child_budgets)
        self._eval_cache: dict = {}
        self._reset_counters()

    def _reset_counters(self):
        self.nodes = 0
        self.max_ply = 0
        self.pv = [[] for _ in range(MAX_PLY + MAX_QPLY + 2)]
        self._node_limit = None
        self._deadline = None

    def new_game(self):
        if self.tt is not None:
            self.tt.clear()
        self._eval_cache.clear()

    def stop(self):
        self.stop_event.set()

    # -- entry point ---------------------------------------------------------

    def search(self, pos: Position, limits: SearchLimits) -> SearchResult:
        moves = pos.legal_moves()
        if not moves or _is_draw_by_rule(pos) or pos.history.count(pos.hash) >= 3:
            raise ValueError("cannot search a terminal position")
        started = time.perf_counter()
        self._reset_counters()
        self.stop_event.clear()
        self._prob = limits.regime == PROBABILITY
        self._threshold = limits.threshold
        self._node_limit = limits.nodes
        self._deadline = started + limits.time_ms / 1000.0 if limits.time_ms is not None else None
        if len(self._eval_cache) > 500_000:
            self._eval_cache.clear()

        result = None
        self._root_best = None
        iterations = 0
        stopped = False
        for budget in limits.schedule():
            if self._prob:
                self._threshold = budget
                root_budget = 1.0
            else:
                root_budget = budget
            try:
                score = self._negamax(pos, root_budget, -INF, INF, 0)
            except SearchStopped:
                stopped = True
                break
            iterations += 1
            result = SearchResult(score, list(self.pv[0]), self.nodes, self.max_ply, True, iterations)
        if not stopped:
            result.elapsed = time.perf_counter() - started
            return result

        # Interrupted: report the last completed iteration, or the partial root best.
        if result is None:
            if self._root_best is not None:
                move, score = self._root_best
            else:
                move, score = order_moves(pos, moves)[0], 0
            result = SearchResult(score, [move], self.nodes, self.max_ply, False, 0)
        else:
            result = SearchResult(result.score, result.pv, self.nodes, self.max_ply, False, iterations)
        result.elapsed = time.perf_counter() - started
        return result

    # -- recursion -----------------------------------------------------------

    def _tick(self):
        self.nodes += 1
        if self._node_limit is not None and self.nodes > self._node_limit:
            raise SearchStopped
        if self.nodes % self.poll_interval == 0:
            if self.stop_event.is_set():
                raise SearchStopped
            if self._deadline is not None and time.perf_counter() >= self._deadline:
                raise SearchStopped

    def _static_eval(self, pos) -> int:
        key = pos.hash
        v = self._eval_cache.get(key)
        if v is None:
            raw = self.evaluate(pos)
            v = int(round(raw * EVAL_SCALE))
            if v >= EVAL_SCALE:
                v = EVAL_SCALE - 1
            elif v <= -EVAL_SCALE:
                v = -EVAL_SCALE + 1
            self._eval_cache[key] = v
        return v

    def _negamax(self, pos, budget, alpha: int, beta: int, ply: int) -> int:
        self.pv[ply] = []
        self._tick()
        if ply > self.max_ply:
            self.max_ply = ply
        if ply:
            if _is_draw_by_rule(pos) or pos.history.count(pos.hash) > 1:
                if self.on_node:
                    self.on_node("terminal", pos, ply, budget)
                return 0
        moves = pos.legal_moves()
        if not moves:
            if self.on_node:
                self.on_node("terminal", pos, ply, budget)
            return -(MATE - ply) if pos.in_check() else 0

        if self._prob:
            expand = budget > self._threshold * (1 + _PROB_RTOL)
        else:
            expand = budget > 0
        if ply == 0:
            expand = True
        if not expand or ply >= MAX_PLY:
            if self.on_node:
                self.on_node("leaf", pos, ply, budget)
            return self._quiesce(pos, moves, alpha, beta, ply, 0)

        if self.on_node:
            self.on_node("internal", pos, ply, budget)

        tt_key = budget / self._threshold if self._prob else float(budget)
        tt_move = None
        alpha_orig = alpha
        if self.tt is not None:
            entry = self.tt.probe(pos.hash)
            if entry is not None:
                tt_move = entry.move
                if ply and entry.budget >= tt_key * (1 - _PROB_RTOL):
                    s = _from_tt(entry.score, ply)
                    if (entry.bound == EXACT or (entry.bound == LOWER and s >= beta)
                            or (entry.bound == UPPER and s <= alpha)):
                        if entry.bound == EXACT and entry.move in moves:
                            child = pos.apply(entry.move)
                            self.pv[ply] = [entry.move] + self._tt_line(child, MAX_PLY - ply)
                        return s

        n = len(moves)
        probs = None
        if self._prob:
            if self.estimator is not None and tt_key >= getattr(self.estimator, "min_budget_ratio", 0.0):
                dist = self.estimator(pos, moves)
                probs = dist
                child_budgets = {m: budget * dist[m] for m in moves}
            else:
                share = budget / n
                child_budgets = None
        if self.on_expand:
            if not self._prob:
                self.on_expand(pos, budget, [budget - 1] * n)
            elif child_budgets is None:
                self.on_expand(pos, budget, [share] * n)
            else:
                self.on_expand(pos, budget, list(child_budgets.values()))

        ordered = order_moves(pos, moves, tt_move, probs)
        best = -INF
        best_move = None
        pruning = self.alpha_beta
        for m in ordered:
            child = pos.apply(m)
            if not self._prob:
                cb = budget - 1
            elif child_budgets is None:
                cb = share
            else:
                cb = child_budgets[m]
            if pruning:
                score = -self._negamax(child, cb, -beta, -alpha, ply + 1)
            else:
                score = -self._negamax(child, cb, -INF, INF, ply + 1)
            if score > best:
                best = score
                best_move = m
                if ply == 0:
                    self._root_best = (m, score)
                if score > alpha:
                    alpha = score
                    self.pv[ply] = [m] + self.pv[ply + 1]
                    if pruning and alpha >= beta:
                        break

        if self.tt is not None:
            if best >= beta:
                bound = LOWER
            elif best <= alpha_orig:
                bound = UPPER
            else:
                bound = EXACT
            self.tt.store(TranspositionEntry(pos.hash, tt_key, _to_tt(best, ply), bound, best_move))
        return best

    def _tt_line(self, pos, limit: int) -> list:
        """Continue a PV cut short by a table hit along exact entries."""
        line, seen = [], {pos.hash}
        while len(line) < limit:
            entry = self.tt.probe(pos.hash)
            if entry is None or entry.bound != EXACT or entry.move not in pos.legal_moves():
                break
            pos = pos.apply(entry.move)
            if pos.hash in seen:
                break
            seen.add(pos.hash)
            line.append(entry.move)
        return line

    def static_eval(self, pos) -> int:
        """Cached, clipped integer evaluation as used at the leaves."""
        return self._static_eval(pos)

    def _quiesce(self, pos, moves, alpha: int, beta: int, ply: int, qply: int) -> int:
        """Quiescence at a node that has already been counted and checked for
        rule draws and mate/stalemate."""
        self.pv[ply] = []
        stand = self._static_eval(pos)
        if not self.quiescence or qply >= MAX_QPLY:
            return stand
        pruning = self.alpha_beta
        if pruning and stand >= beta:
            return stand
        best = stand
        if stand > alpha:
            alpha = stand
        for m in _qsearch_order(moves):
            child = pos.apply(m)
            score = -self._qnode(child, -beta if pruning else -INF, -alpha if pruning else INF,
                                 ply + 1, qply + 1)
            if score > best:
                best = score
                if score > alpha:
                    alpha = score
                    self.pv[ply] = [m] + self.pv[ply + 1]
                    if pruning and alpha >= beta:
                        break
        return best

    def _qnode(self, pos, alpha: int, beta: int, ply: int, qply: int) -> int:
        self.pv[ply] = []
        self._tick()
        if self.on_node:
            self.on_node("q", pos, ply, None)
        if _is_draw_by_rule(pos):
            return 0
        moves = pos.legal_moves()
        if not moves:
            return -(MATE - ply) if pos.in_check() else 0
        return self._quiesce(pos, moves, alpha, beta, ply, qply)

    def qsearch(self, pos, window: Window | None = None) -> int:
        """Stand-alone quiescence search of ``pos`` (side-to-move score)."""
        self._reset_counters()
        w = window or Window(-INF, INF)
        moves = pos.legal_moves()
        self.nodes = 1
        if not moves:
            return -MATE if pos.in_check() else 0
        return self._quiesce(pos, moves, w.lowerbound, w.upperbound, 0, 0)


def search(p: Position, limits: SearchLimits, evaluate: Callable, estimator=None, **options) -> SearchResult:
    """One-shot convenience wrapper around :class:`Searcher`."""
    return Searcher(evaluate, estimator, **options).search(p, limits)


def qsearch(p: Position, window: Window | None, evaluate: Callable) -> int:
    return Searcher(evaluate).qsearch(p, window)


def score_to_float(score: int) -> float:
    """Engine units back to (-1, 1); mate scores map to +-1."""
    if score > MATE_BOUND:
        return 1.0
    if score < -MATE_BOUND:
        return -1.0
    return score / EVAL_SCALE


def pv_leaf(root: Position, pv) -> Position:
    p = root
    for m in pv:
        p = p.apply(m)
    return p


# -- simple evaluators -----------------------------------------------------

MATERIAL_SCALE = 10.0


def material_evaluator(pos) -> float:
    """tanh(material balance / MATERIAL_SCALE) from the side to move's view."""
    total = 0
    for pc in pos.board:
        if pc:
            v = PIECE_VALUES[pc if pc > 0 else -pc] if abs(pc) != KING else 0
            total += v if pc > 0 else -v
    return math.tanh(pos.turn * total / MATERIAL_SCALE)
