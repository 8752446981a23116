"""UCI protocol front end."""

from __future__ import annotations

import sys
import threading
import time
from typing import Optional, TextIO

from .chesscore import Position, parse_fen, parse_uci
from .engine import Engine, EngineConfig
from .search import (DEPTH, EVAL_SCALE, PROBABILITY, SearchLimits, SearchResult)

ENGINE_NAME = "probchess"
ENGINE_AUTHOR = "probchess developers"

MIN_BUDGET_MS = 10.0
# Time kept back from a fixed movetime for thread start-up and output.
MOVETIME_MARGIN_MS = 5.0


def time_budget(remaining_ms: float, increment_ms: float = 0.0, moves_played: int = 0) -> float:
    """Per-move budget: remaining/30 + 0.8 * increment, clamped to [10 ms, remaining/2]."""
    if remaining_ms <= 0:
        raise ValueError("remaining time must be positive")
    budget = remaining_ms / 30.0 + 0.8 * increment_ms
    return min(max(budget, MIN_BUDGET_MS), remaining_ms / 2.0)


def format_score(result: SearchResult) -> str:
    if result.is_mate:
        return f"mate {result.mate_in}"
    return f"cp {round(result.score * 100 / EVAL_SCALE)}"


class UciSession:
    """One protocol conversation. ``run`` reads commands until ``quit`` or EOF."""

    def __init__(self, config: EngineConfig | None = None, out: TextIO = sys.stdout,
                 engine: Engine | None = None):
        self.config = config or EngineConfig.default()
        self.out = out
        self.engine = engine or Engine(self.config)
        self.position = Position.start()
        self._thread: Optional[threading.Thread] = None
        self._lock = threading.Lock()
        self._bounded = True

    # -- output ----------------------------------------------------------------

    def send(self, line: str):
        with self._lock:
            self.out.write(line + "\n")
            self.out.flush()

    # -- command loop ----------------------------------------------------------

    def run(self, stream: TextIO) -> int:
        for raw in stream:
            if not self.handle(raw):
                break
        self._finish_search()
        return 0

    def handle(self, line: str) -> bool:
        """Process one command line; False after ``quit``."""
        tokens = line.split()
        if not tokens:
            return True
        cmd, args = tokens[0], tokens[1:]
        if cmd == "quit":
            self.stop()
            return False
        handler = getattr(self, f"cmd_{cmd}", None)
        if handler is not None:
            handler(args)
        return True

    def cmd_uci(self, args):
        self.send(f"id name {ENGINE_NAME}")
        self.send(f"id author {ENGINE_AUTHOR}")
        c = self.config
        self.send(f"option name Regime type combo default {c.regime} var {DEPTH} var {PROBABILITY}")
        self.send(f"option name Threshold type string default {c.threshold}")
        self.send(f"option name Depth type spin default {c.depth} min 0 max 64")
        self.send(f"option name Estimator type combo default {c.estimator} var uniform var net")
        self.send(f"option name EvalWeights type string default {c.eval_weights or '<empty>'}")
        self.send(f"option name MoveNetWeights type string default {c.movenet_weights or '<empty>'}")
        self.send(f"option name Hash type spin default {c.tt_size} min 1 max 67108864")
        self.send(f"option name Seed type spin default {c.seed} min 0 max 2147483647")
        self.send("uciok")

    def cmd_isready(self, args):
        self.send("readyok")

    _OPTIONS = {"regime": ("regime", str), "threshold": ("threshold", float),
                "depth": ("depth", int), "estimator": ("estimator", str),
                "evalweights": ("eval_weights", str), "movenetweights": ("movenet_weights", str),
                "hash": ("tt_size", int), "seed": ("seed", int)}

    def cmd_setoption(self, args):
        text = " ".join(args)
        if not text.startswith("name "):
            return
        name, _, value = text[5:].partition(" value ")
        key = name.strip().replace(" ", "").lower()
        if key not in self._OPTIONS:
            self.send(f"info string unknown option {name.strip()}")
            return
        attr, kind = self._OPTIONS[key]
        value = value.strip()
        try:
            parsed = None if value in ("", "<empty>") else kind(value)
            config = EngineConfig(**{**self.config.__dict__, attr: parsed})
            engine = Engine(config)
        except Exception as exc:
            self.send(f"info string option {name.strip()} rejected: {exc}")
            return
        self._finish_search()
        self.config, self.engine = config, engine

    def cmd_ucinewgame(self, args):
        self._finish_search()
        self.engine.new_game()
        self.position = Position.start()

    def cmd_position(self, args):
        try:
            if args and args[0] == "startpos":
                pos, rest = Position.start(), args[1:]
            elif args and args[0] == "fen":
                idx = args.index("moves") if "moves" in args else len(args)
                pos, rest = parse_fen(" ".join(args[1:idx])), args[idx:]
            else:
                raise ValueError("expected startpos or fen")
            if rest:
                if rest[0] != "moves":
                    raise ValueError(f"unexpected token {rest[0]!r}")
                for tok in rest[1:]:
                    pos = pos.apply(parse_uci(pos, tok))
        except ValueError as exc:
            self.send(f"info string bad position: {exc}")
            return
        self.position = pos

    def cmd_go(self, args):
        self._finish_search()
        opts, i = {}, 0
        while i < len(args):
            key = args[i]
            if key in ("infinite", "ponder"):
                opts[key] = True
                i += 1
            elif key == "searchmoves":
                break
            else:
                if i + 1 < len(args):
                    try:
                        opts[key] = float(args[i + 1])
                    except ValueError:
                        pass
                i += 2
        self._start_search(self.position, opts)

    def cmd_stop(self, args):
        self.stop()

    # -- search control --------------------------------------------------------

    def limits_for(self, pos: Position, opts: dict) -> SearchLimits:
        nodes = int(opts["nodes"]) if "nodes" in opts else None
        time_ms = None
        if "movetime" in opts:
            time_ms = max(opts["movetime"] - MOVETIME_MARGIN_MS, 1.0)
        else:
            side = "wtime" if pos.turn == 1 else "btime"
            inc = "winc" if pos.turn == 1 else "binc"
            if side in opts and opts[side] > 0:
                time_ms = time_budget(opts[side], opts.get(inc, 0.0), pos.fullmove - 1)
        if opts.get("infinite"):
            nodes = time_ms = None
        if "depth" in opts:
            return self.config.limits(nodes=nodes, time_ms=time_ms, depth=int(opts["depth"]))
        return self.config.limits(nodes=nodes, time_ms=time_ms)

    def _start_search(self, pos: Position, opts: dict):
        legal = pos.legal_moves()
        if not legal:
            self.send("info string no legal moves")
            self.send("bestmove 0000")
            return
        limits = self.limits_for(pos, opts)
        self._bounded = not opts.get("infinite") and (
            limits.nodes is not None or limits.time_ms is not None or limits.regime == DEPTH)
        self.engine.searcher.stop_event.clear()
        started = time.perf_counter()

        def work():
            try:
                if pos.draw_by_rule() or pos.history.count(pos.hash) >= 3:
                    result = SearchResult(0, [legal[0]], 0, 0, True)
                else:
                    result = self.engine.search(pos, limits)
            except Exception as exc:
                self.send(f"info string search failed: {exc}")
                result = SearchResult(0, [legal[0]], 0, 0, False)
            move = result.best_move if result.best_move in legal else legal[0]
            ms = int((time.perf_counter() - started) * 1000)
            pv = " ".join(m.uci() for m in result.pv) or move.uci()
            self.send(f"info depth {max(result.iterations, 1)} seldepth {result.max_ply} "
                      f"score {format_score(result)} nodes {result.nodes} time {ms} pv {pv}")
            self.send(f"bestmove {move.uci()}")

        self._thread = threading.Thread(target=work, daemon=True)
        self._thread.start()

    def stop(self):
        if self._thread is not None:
            self.engine.stop()
            self._thread.join()
            self._thread = None

    def _finish_search(self):
        """Wait for a bounded search; stop an unbounded one."""
        if self._thread is not None:
            if self._bounded:
                self._thread.join()
                self._thread = None
            else:
                self.stop()


def uci_session(input_stream: TextIO = sys.stdin, output_stream: TextIO = sys.stdout,
                config: EngineConfig | None = None) -> int:
    return UciSession(config, output_stream).run(input_stream)
