"""Measurement: EPD suite scoring, engine-vs-engine matches and Elo estimates."""

from __future__ import annotations

import json
import logging
import math
import random
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .chesscore import FenError, GameState, Position, game_state, parse_fen, parse_san
from .engine import Engine, EngineConfig
from .search import SearchLimits

log = logging.getLogger(__name__)

MAX_SCORE = 10
DEFAULT_MAX_MOVES = 300


class EpdError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class StsRecord:
    position: Position
    scores: dict  # Move -> points in [0, 10]
    theme: str = ""
    id: str = ""

    def __post_init__(self):
        if MAX_SCORE not in self.scores.values():
            raise EpdError(f"record {self.id!r} has no {MAX_SCORE}-point solution")

    def score_of(self, move) -> int:
        return self.scores.get(move, 0)


def _split_opcodes(text: str) -> list:
    """Split EPD operations on ';' outside double quotes."""
    ops, cur, quoted = [], [], False
    for ch in text:
        if ch == '"':
            quoted = not quoted
        if ch == ";" and not quoted:
            ops.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if quoted:
        raise EpdError("unterminated quote")
    tail = "".join(cur).strip()
    if tail:
        ops.append(tail)
    return [o for o in ops if o]


def parse_epd(line: str, line_no: Optional[int] = None) -> StsRecord:
    """One EPD line: four FEN fields then ``bm``, ``id`` and ``c0`` operations.

    ``c0 "Nf3=10, d4=6"`` gives partial credit; ``bm`` moves score 10 unless
    ``c0`` lists them. The theme is the ``id`` up to its last ``.``.
    """
    parts = line.strip().split(None, 4)
    if len(parts) < 4:
        raise EpdError("expected four FEN fields", line_no)
    try:
        pos = parse_fen(" ".join(parts[:4]) + " 0 1")
    except FenError as exc:
        raise EpdError(str(exc), line_no) from None
    ops = _split_opcodes(parts[4]) if len(parts) > 4 else []
    bm, c0, rid = [], None, ""
    for op in ops:
        name, _, arg = op.partition(" ")
        arg = arg.strip()
        if name == "bm":
            bm = arg.split()
        elif name == "id":
            rid = arg.strip('"')
        elif name == "c0":
            c0 = arg.strip('"')

    def resolve(text):
        try:
            return parse_san(pos, text)
        except ValueError:
            raise EpdError(f"illegal solution move {text!r}", line_no) from None

    scores = {}
    if c0 is not None:
        for item in c0.split(","):
            item = item.strip()
            if not item:
                continue
            mv, eq, pts = item.rpartition("=")
            try:
                value = int(pts)
            except ValueError:
                value = -1
            if not eq or not 0 <= value <= MAX_SCORE:
                raise EpdError(f"malformed c0 entry {item!r}", line_no)
            scores[resolve(mv.strip())] = value
    for text in bm:
        scores.setdefault(resolve(text), MAX_SCORE)
    if not scores:
        raise EpdError("no solution moves", line_no)
    theme = rid.rsplit(".", 1)[0] if "." in rid else rid
    rec_scores = scores
    if MAX_SCORE not in rec_scores.values():
        raise EpdError(f"no {MAX_SCORE}-point solution", line_no)
    return StsRecord(pos, rec_scores, theme, rid)


def load_epd(path) -> list:
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if line.strip() and not line.lstrip().startswith("#"):
            out.append(parse_epd(line, n))
    return out


# Built-in sanity suite: mates, captures, forks, promotions and a few quiet
# positions with graded credit. Every record was checked by hand.
SANITY_SUITE_EPD = """\
6k1/5ppp/8/8/8/8/5PPP/R5K1 w - - bm Ra8; id "mate.1"; c0 "Ra8=10";
r1bqkb1r/pppp1ppp/2n2n2/4p2Q/2B1P3/8/PPPP1PPP/RNB1K1NR w KQkq - bm Qxf7; id "mate.2"; c0 "Qxf7=10";
6k1/5ppp/8/8/8/8/1q3PPP/3R2K1 w - - bm Rd8; id "mate.3"; c0 "Rd8=10";
k7/8/1K6/8/8/8/7Q/8 w - - bm Qh8; id "mate.4"; c0 "Qh8=10, Qa2=2, Qc7=0";
6k1/R7/8/8/8/8/8/1R4K1 w - - bm Rb8; id "mate.5"; c0 "Rb8=10";
4k3/8/8/3q4/8/8/3R4/3RK3 w - - bm Rxd5; id "capture.1"; c0 "Rxd5=10";
4k3/8/8/8/1q6/8/2N5/4K3 w - - bm Nxb4; id "capture.2"; c0 "Nxb4=10";
4k3/8/8/3p4/4P3/8/8/4K3 w - - bm exd5; id "capture.3"; c0 "exd5=10";
4k3/8/8/8/8/2b5/8/Q3K3 w - - bm Qxc3; id "capture.4"; c0 "Qxc3=10";
6k1/8/8/8/8/n7/8/R3K2R w KQ - bm Rxa3; id "capture.5"; c0 "Rxa3=10";
r3k3/8/8/3N4/8/8/8/4K3 w q - bm Nc7; id "fork.1"; c0 "Nc7=10";
8/4k3/8/q7/1N6/8/8/6K1 w - - bm Nc6; id "fork.2"; c0 "Nc6=10";
3r2k1/5ppp/8/8/8/8/5PPP/3R2K1 w - - bm Rxd8; id "exchange.1"; c0 "Rxd8=10";
8/8/8/8/8/5k2/3p4/1K6 b - - bm d1=Q; id "promotion.1"; c0 "d1=Q=10, d1=R=6";
8/P7/8/8/8/8/6k1/K7 w - - bm a8=Q; id "promotion.2"; c0 "a8=Q=10, a8=R=6";
r5k1/8/8/8/8/8/5PPP/6K1 w - - bm h3 g3; id "safety.1"; c0 "h3=10, g3=10, h4=8, f3=8, f4=8, Kf1=7, g4=6";
8/8/8/8/8/k7/4P3/4K3 w - - bm e4; id "pawn.1"; c0 "e4=10, e3=7, Kd2=5, Kf2=5, Kd1=3, Kf1=3";
rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - bm e4 d4; id "opening.1"; c0 "e4=10, d4=10, Nf3=9, c4=9, Nc3=6, g3=6, e3=5, b3=4";
rnbqkbnr/pppp1ppp/8/4p3/4P3/8/PPPP1PPP/RNBQKBNR w KQkq - bm Nf3; id "opening.2"; c0 "Nf3=10, Nc3=8, Bc4=8, d4=6, f4=5";
r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - bm Bb5 Bc4; id "opening.3"; c0 "Bb5=10, Bc4=10, d4=9, Nc3=8, c3=6";
"""


def sanity_suite() -> list:
    return [parse_epd(line, n) for n, line in enumerate(SANITY_SUITE_EPD.splitlines(), 1)
            if line.strip()]


# -- suite scoring -----------------------------------------------------------

@dataclass
class StsResult:
    total: int
    maximum: int
    by_theme: dict
    moves: list  # chosen move (or None) per record
    failures: int = 0


def _as_engine(engine) -> Engine:
    if isinstance(engine, Engine):
        return engine
    if isinstance(engine, EngineConfig):
        return Engine(engine)
    return Engine(EngineConfig(), evaluator=engine)


def run_sts(engine, records, nodes: Optional[int] = 1000, time_ms: Optional[float] = None,
            limits: SearchLimits | None = None) -> StsResult:
    """Score ``engine`` (Engine, EngineConfig or evaluator callable) on a suite."""
    records = list(records)
    if not records:
        raise ValueError("no suite records")
    eng = _as_engine(engine)
    limits = limits or eng.config.limits(nodes=nodes, time_ms=time_ms)
    total, failures, moves = 0, 0, []
    by_theme = defaultdict(int)
    for rec in records:
        eng.new_game()
        try:
            move = eng.choose(rec.position, limits)
        except Exception as exc:
            log.warning("engine failed on %s: %s", rec.id, exc)
            failures += 1
            move = None
        pts = rec.score_of(move) if move is not None else 0
        total += pts
        by_theme[rec.theme] += pts
        moves.append(move)
    return StsResult(total, MAX_SCORE * len(records), dict(by_theme), moves, failures)


def random_play_expectation(records) -> float:
    """Expected suite score of a uniformly random mover."""
    return sum(sum(r.scores.values()) / len(r.position.legal_moves()) for r in records)


# -- matches -----------------------------------------------------------------

WIN, DRAW, LOSS = 1.0, 0.5, 0.0


@dataclass
class GameRecord:
    game: int
    opening: int
    a_white: bool
    result: float  # points for engine A
    termination: str
    moves: int  # plies played
    forfeit: bool = False

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


@dataclass
class MatchResult:
    wins: int = 0
    draws: int = 0
    losses: int = 0
    games: list = field(default_factory=list)

    def __post_init__(self):
        if self.games and len(self.games) != self.wins + self.draws + self.losses:
            raise ValueError("game records disagree with the counts")

    @property
    def played(self) -> int:
        return self.wins + self.draws + self.losses

    @property
    def score(self) -> float:
        if not self.played:
            raise ValueError("empty match")
        return (self.wins + 0.5 * self.draws) / self.played

    def add(self, rec: GameRecord):
        self.games.append(rec)
        if rec.result == WIN:
            self.wins += 1
        elif rec.result == LOSS:
            self.losses += 1
        else:
            self.draws += 1

    def swapped(self) -> "MatchResult":
        games = [GameRecord(g.game, g.opening, not g.a_white, 1.0 - g.result, g.termination,
                            g.moves, g.forfeit) for g in self.games]
        return MatchResult(self.losses, self.draws, self.wins, games)

    def head(self, n: int) -> "MatchResult":
        out = MatchResult()
        for g in self.games[:n]:
            out.add(g)
        return out


def random_openings(n: int, plies: int = 4, seed: int = 0) -> list:
    """``n`` distinct non-terminal positions reached by random moves from the start."""
    rng = random.Random(seed)
    seen, out = set(), []
    while len(out) < n:
        pos = Position.start()
        for _ in range(plies):
            pos = pos.apply(rng.choice(pos.legal_moves()))
        if pos.hash not in seen and not game_state(pos).is_terminal:
            seen.add(pos.hash)
            out.append(pos)
    return out


_TERMINATION = {GameState.CHECKMATE: "checkmate", GameState.STALEMATE: "stalemate",
                GameState.DRAW_REPETITION: "repetition", GameState.DRAW_FIFTY_MOVES: "fifty-moves",
                GameState.DRAW_INSUFFICIENT_MATERIAL: "insufficient-material"}


def play_game(white: Engine, black: Engine, start: Position, limits_white: SearchLimits,
              limits_black: SearchLimits, max_moves: int = DEFAULT_MAX_MOVES) -> tuple:
    """Play out a game; returns ``(white points, termination, plies, forfeit)``."""
    white.new_game()
    black.new_game()
    pos, plies = start, 0
    while True:
        state = game_state(pos)
        if state.is_terminal:
            if state == GameState.CHECKMATE:
                return (0.0 if pos.turn == 1 else 1.0), _TERMINATION[state], plies, False
            return 0.5, _TERMINATION[state], plies, False
        if plies >= 2 * max_moves:
            return 0.5, "move-cap", plies, False
        mover, limits = (white, limits_white) if pos.turn == 1 else (black, limits_black)
        try:
            move = mover.choose(pos, limits)
            if move not in pos.legal_moves():
                raise RuntimeError(f"illegal move {move}")
        except Exception as exc:
            log.warning("engine crashed, game forfeited: %s", exc)
            return (0.0 if pos.turn == 1 else 1.0), "forfeit", plies, True
        pos = pos.apply(move)
        plies += 1


def _play_pair(args):
    cfg_a, cfg_b, idx, fen, nodes, time_ms, max_moves = args
    a, b = Engine(cfg_a), Engine(cfg_b)
    la, lb = cfg_a.limits(nodes=nodes, time_ms=time_ms), cfg_b.limits(nodes=nodes, time_ms=time_ms)
    start = parse_fen(fen)
    out = []
    for a_white in (True, False):
        if a_white:
            pts, term, plies, forfeit = play_game(a, b, start, la, lb, max_moves)
        else:
            pts, term, plies, forfeit = play_game(b, a, start, lb, la, max_moves)
            pts = 1.0 - pts
        out.append((idx, a_white, pts, term, plies, forfeit))
    return out


def run_match(config_a: EngineConfig, config_b: EngineConfig, games: int, openings=None,
              nodes: Optional[int] = 1000, time_ms: Optional[float] = None,
              max_moves: int = DEFAULT_MAX_MOVES, log_path=None, workers: int = 1,
              seed: int = 0) -> MatchResult:
    """Paired games: each opening is played twice with colours swapped.

    ``openings`` are positions or FEN strings, cycled as needed; by default
    random four-ply openings. Game records stream to ``log_path`` as JSON lines.
    """
    if games <= 0:
        raise ValueError("a match needs at least one game pair")
    if games % 2:
        raise ValueError("game count must be even (colour-swapped pairs)")
    pairs = games // 2
    if openings is None:
        openings = random_openings(pairs, seed=seed)
    fens = [o if isinstance(o, str) else o.fen() for o in openings]
    if not fens:
        raise ValueError("empty opening set")
    jobs = [(config_a, config_b, k % len(fens), fens[k % len(fens)], nodes, time_ms, max_moves)
            for k in range(pairs)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_play_pair, jobs))
    else:
        outcomes = map(_play_pair, jobs)
    result = MatchResult()
    fh = open(log_path, "w") if log_path else None
    try:
        for pair in outcomes:
            for idx, a_white, pts, term, plies, forfeit in pair:
                rec = GameRecord(len(result.games), idx, a_white, pts, term, plies, forfeit)
                result.add(rec)
                if fh:
                    fh.write(rec.to_json() + "\n")
    finally:
        if fh:
            fh.close()
    return result


def load_match(path) -> MatchResult:
    result = MatchResult()
    for line in Path(path).read_text().splitlines():
        if line.strip():
            result.add(GameRecord(**json.loads(line)))
    return result


# -- Elo ---------------------------------------------------------------------

Z95 = 1.959963984540054


@dataclass
class EloEstimate:
    difference: float
    half_width: float
    score: float
    games: int
    bound: Optional[str] = None  # "lower" / "upper" when the score was 1 / 0

    @property
    def interval(self) -> tuple:
        return self.difference - self.half_width, self.difference + self.half_width

    def __str__(self):
        if self.bound == "lower":
            return f">= {self.difference:+.1f} Elo (score {self.score:.3f}, {self.games} games)"
        if self.bound == "upper":
            return f"<= {self.difference:+.1f} Elo (score {self.score:.3f}, {self.games} games)"
        return f"{self.difference:+.1f} +/- {self.half_width:.1f} Elo (score {self.score:.3f}, {self.games} games)"


def elo_from_score(score: float) -> float:
    """400 * log10(s / (1 - s))."""
    return 400.0 * (math.log10(score) - math.log10(1.0 - score))


def elo_diff(result: MatchResult) -> EloEstimate:
    """Logistic Elo difference with a 95% delta-method interval.

    A score of exactly 0 or 1 is clamped half a game from the edge and
    reported as a bound.
    """
    n = result.played
    if n < 1:
        raise ValueError("empty match")
    w, d, l = result.wins, result.draws, result.losses
    s = (w + 0.5 * d) / n
    s_other = (l + 0.5 * d) / n  # 1 - s, computed so that swapping A/B is exact
    bound = None
    if s == 1.0 or s == 0.0:
        bound = "lower" if s == 1.0 else "upper"
        eps = 0.5 / n
        s_c, o_c = (1.0 - eps, eps) if s == 1.0 else (eps, 1.0 - eps)
        diff = 400.0 * (math.log10(s_c) - math.log10(o_c))
        return EloEstimate(diff, float("inf"), s, n, bound)
    diff = 400.0 * (math.log10(s) - math.log10(s_other))
    var = (w * (1.0 - s) ** 2 + d * (0.5 - s) ** 2 + l * s ** 2) / n
    se = math.sqrt(var / n)
    half = Z95 * se * 400.0 / (math.log(10.0) * s * s_other)
    return EloEstimate(diff, half, s, n)


def elo_from_counts(wins: int, draws: int, losses: int) -> EloEstimate:
    return elo_diff(MatchResult(wins, draws, losses))
