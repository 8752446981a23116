"""Chess engine with a self-play trained neural evaluator and probability-limited search."""

from .chesscore import GameState, Move, Position, game_state, parse_fen, perft
from .engine import Engine, EngineConfig, NetEvaluator
from .features import NUM_FEATURES, extract
from .neuralnet import Network, Topology, build, default_topology
from .search import SearchLimits, SearchResult, Searcher, material_evaluator, search

__all__ = [
    "Engine", "EngineConfig", "GameState", "Move", "NUM_FEATURES", "NetEvaluator", "Network",
    "Position", "SearchLimits", "SearchResult", "Searcher", "Topology", "build",
    "default_topology", "extract", "game_state", "material_evaluator", "parse_fen", "perft",
    "search",
]
