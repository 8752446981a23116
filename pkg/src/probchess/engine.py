"""Engine configuration and the object that ties evaluator, estimator and search together."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import neuralnet
from .chesscore import Move, Position
from .features import LAYOUT, NUM_FEATURES, extract
from .probestimator import DEFAULT_GATE, MOVE_GROUPS, NetEstimator, UniformEstimator
from .search import (DEFAULT_THRESHOLD, DEPTH, PROBABILITY, SearchLimits, SearchResult,
                     Searcher, material_evaluator)

WEIGHTS_DIR_ENV = "PROBCHESS_WEIGHTS_DIR"
EVAL_WEIGHTS_NAME = "eval.pcnn"
MOVENET_WEIGHTS_NAME = "movenet.pcnn"

UNIFORM = "uniform"
NET = "net"


class NetEvaluator:
    """Wraps an evaluator network as ``position -> score``."""

    def __init__(self, net: neuralnet.Network):
        if net.topology.groups != LAYOUT.groups:
            raise neuralnet.LayoutMismatch(
                f"evaluator expects {net.topology.groups}, features provide {LAYOUT.groups}")
        self.net = net
        self._buf = np.empty(NUM_FEATURES, dtype=np.float32)

    def __call__(self, pos: Position) -> float:
        return self.net.forward(extract(pos, self._buf))


@dataclass
class EngineConfig:
    eval_weights: Optional[str] = None  # None: material evaluator
    movenet_weights: Optional[str] = None
    regime: str = PROBABILITY
    threshold: float = DEFAULT_THRESHOLD
    depth: int = 6
    estimator: str = UNIFORM
    tt_size: int = 1 << 16
    seed: int = 0
    estimator_gate: float = DEFAULT_GATE

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.regime not in (DEPTH, PROBABILITY):
            raise ValueError(f"unknown regime {self.regime!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.estimator not in (UNIFORM, NET):
            raise ValueError(f"unknown estimator mode {self.estimator!r}")
        if self.estimator == NET and not self.movenet_weights:
            raise ValueError("net estimator mode requires move-net weights")
        if self.tt_size < 1:
            raise ValueError("tt_size must be positive")

    def limits(self, nodes: Optional[int] = None, time_ms: Optional[float] = None,
               depth: Optional[int] = None) -> SearchLimits:
        """Search limits for this engine; ``depth`` overrides the configured one
        (and forces the depth regime)."""
        if depth is not None:
            return SearchLimits.depth_limited(depth, nodes=nodes, time_ms=time_ms)
        if self.regime == DEPTH:
            return SearchLimits.depth_limited(self.depth, nodes=nodes, time_ms=time_ms)
        return SearchLimits.probability_limited(self.threshold, nodes=nodes, time_ms=time_ms)

    def with_overrides(self, **kw) -> "EngineConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    @classmethod
    def from_file(cls, path, **overrides) -> "EngineConfig":
        """Read ``key = value`` lines (``#`` comments); ``overrides`` win."""
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in kinds:
                raise ValueError(f"{path}:{n}: unknown key {key!r}")
            values[key] = _coerce(kinds[key], val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def default(cls, **overrides) -> "EngineConfig":
        """Default config, picking up weights from ``$PROBCHESS_WEIGHTS_DIR`` when present."""
        values = {}
        wdir = os.environ.get(WEIGHTS_DIR_ENV)
        if wdir:
            ev, mv = Path(wdir) / EVAL_WEIGHTS_NAME, Path(wdir) / MOVENET_WEIGHTS_NAME
            if ev.exists():
                values["eval_weights"] = str(ev)
            if mv.exists():
                values["movenet_weights"] = str(mv)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _coerce(kind, val: str):
    kind = str(kind)
    if val.lower() in ("none", ""):
        return None
    if "int" in kind:
        return int(val)
    if "float" in kind:
        return float(val)
    return val


class Engine:
    """A configured player: evaluator + estimator + a reusable searcher."""

    def __init__(self, config: EngineConfig | None = None, evaluator=None, move_net=None):
        self.config = config or EngineConfig()
        if evaluator is None:
            if self.config.eval_weights:
                net, _ = neuralnet.load(self.config.eval_weights, LAYOUT.groups)
                evaluator = NetEvaluator(net)
            else:
                evaluator = material_evaluator
        elif isinstance(evaluator, neuralnet.Network):
            evaluator = NetEvaluator(evaluator)
        self.evaluate = evaluator

        estimator = UniformEstimator()
        if self.config.estimator == NET:
            if move_net is None:
                move_net, _ = neuralnet.load(self.config.movenet_weights, MOVE_GROUPS)
            estimator = NetEstimator(move_net, self.config.estimator_gate)
        self.estimator = estimator
        self.searcher = Searcher(self.evaluate, estimator, tt_size=self.config.tt_size)
        self.rng = random.Random(self.config.seed)

    def new_game(self):
        self.searcher.new_game()
        self.rng.seed(self.config.seed)

    def stop(self):
        self.searcher.stop()

    def search(self, pos: Position, limits: SearchLimits | None = None) -> SearchResult:
        return self.searcher.search(pos, limits or self.config.limits())

    def choose(self, pos: Position, limits: SearchLimits | None = None) -> Move:
        return self.search(pos, limits).best_move
