"""Command-line entry point: ``python -m probchess <command>``."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys

from . import neuralnet as nn
from .engine import EngineConfig, NetEvaluator
from .features import LAYOUT


def _engine_config(args, prefix: str = "") -> EngineConfig:
    get = lambda name: getattr(args, prefix + name, None)
    overrides = dict(eval_weights=get("eval_weights"), movenet_weights=get("movenet_weights"),
                     regime=get("regime"), threshold=get("threshold"), depth=get("depth"),
                     estimator=get("estimator"), tt_size=get("hash"), seed=get("seed"))
    path = get("config")
    if path:
        return EngineConfig.from_file(path, **overrides)
    return EngineConfig.default(**overrides)


def _add_engine_flags(p, prefix: str = ""):
    dash = f"--{prefix.replace('_', '-')}" if prefix else "--"
    dest = lambda name: prefix + name
    p.add_argument(f"{dash}config", dest=dest("config"), help="key = value engine config file")
    p.add_argument(f"{dash}eval-weights", dest=dest("eval_weights"))
    p.add_argument(f"{dash}movenet-weights", dest=dest("movenet_weights"))
    p.add_argument(f"{dash}regime", dest=dest("regime"), choices=("depth", "probability"))
    p.add_argument(f"{dash}threshold", dest=dest("threshold"), type=float)
    p.add_argument(f"{dash}depth", dest=dest("depth"), type=int)
    p.add_argument(f"{dash}estimator", dest=dest("estimator"), choices=("uniform", "net"))
    p.add_argument(f"{dash}hash", dest=dest("hash"), type=int, help="transposition table entries")
    p.add_argument(f"{dash}seed", dest=dest("seed"), type=int)


def _load_eval(path):
    net, _ = nn.load(path, LAYOUT.groups)
    return net


def cmd_gen_corpus(args):
    from .training import generate_eval_corpus, save_positions, synthesize_games, write_games
    rng = random.Random(args.seed)
    if args.games:
        with open(args.games) as fh:
            lines = fh.readlines()
    else:
        moves = synthesize_games(args.synth_games, rng)
        if args.save_games:
            write_games(args.save_games, moves)
        lines = [" ".join(m) for m in moves]
    corpus = generate_eval_corpus(lines, args.count, rng)
    save_positions(args.output, corpus)
    print(f"wrote {len(corpus)} positions to {args.output}")


def cmd_bootstrap(args):
    from .training import BootstrapConfig, bootstrap_material, load_positions
    corpus = load_positions(args.corpus)
    net = nn.build(nn.default_topology(LAYOUT.groups, "tanh", args.scale), seed=args.seed)
    net, metrics = bootstrap_material(net, corpus, random.Random(args.seed),
                                      BootstrapConfig(max_epochs=args.max_epochs, seed=args.seed))
    nn.save(args.output, net)
    print(f"correlation {metrics['correlation']:.4f} after {metrics['epochs']} epochs")


def cmd_train_eval(args):
    from .evalharness import load_epd, sanity_suite
    from .training import TdConfig, load_positions, train_eval
    net, state = nn.load(args.weights, LAYOUT.groups)
    corpus = load_positions(args.corpus)
    config = TdConfig(batch_size=args.batch, nodes=args.nodes, lam=args.lam, alpha=args.alpha,
                      first_only=args.first_only, workers=args.workers)
    suite = load_epd(args.sts) if args.sts else sanity_suite()
    if state is None:
        state = nn.make_optimizer(net, "adadelta", lr=config.alpha)
    history = train_eval(net, corpus, args.iterations, config, random.Random(args.seed),
                         log_path=args.log, sts_records=suite, sts_every=args.sts_every,
                         sts_nodes=args.nodes, state=state)
    nn.save(args.output or args.weights, net, state)
    last = history[-1] if history else {}
    print(json.dumps(last))


def cmd_gen_internal(args):
    from .search import SearchLimits
    from .training import generate_internal_corpus, load_positions, save_positions
    roots = load_positions(args.roots)
    evaluate = NetEvaluator(_load_eval(args.weights))
    limits = SearchLimits.probability_limited(args.threshold, nodes=args.nodes)
    out = generate_internal_corpus(roots, limits, args.rate, random.Random(args.seed), evaluate,
                                   capacity=args.capacity)
    save_positions(args.output, out)
    print(f"wrote {len(out)} positions to {args.output}")


def cmd_label(args):
    from .search import SearchLimits
    from .training import label_best_moves, load_positions, save_records
    positions = load_positions(args.positions)
    evaluate = NetEvaluator(_load_eval(args.weights))
    limits = SearchLimits.probability_limited(args.threshold, nodes=args.nodes,
                                              time_ms=args.movetime)
    records = label_best_moves(positions, limits, evaluate)
    save_records(args.output, records)
    print(f"wrote {len(records)} records to {args.output}")


def cmd_train_movenet(args):
    from .training import MoveNetConfig, load_records, train_movenet
    records = load_records(args.records)
    net, metrics = train_movenet(records, MoveNetConfig(epochs=args.epochs, seed=args.seed,
                                                        scale=args.scale), log_path=args.log)
    nn.save(args.output, net)
    print(json.dumps({k: v for k, v in metrics.items() if k != "epochs"}))


def cmd_sts(args):
    from .evalharness import load_epd, run_sts, sanity_suite
    records = load_epd(args.epd) if args.epd else sanity_suite()
    result = run_sts(_engine_config(args), records, nodes=args.nodes, time_ms=args.movetime)
    for theme, pts in sorted(result.by_theme.items()):
        print(f"{theme:20s} {pts}")
    print(f"total {result.total}/{result.maximum}")


def cmd_match(args):
    from .evalharness import elo_diff, run_match
    a, b = _engine_config(args, "a_"), _engine_config(args, "b_")
    result = run_match(a, b, args.games, nodes=args.nodes, time_ms=args.movetime,
                       max_moves=args.max_moves, log_path=args.log, workers=args.workers,
                       seed=args.seed)
    print(f"+{result.wins} ={result.draws} -{result.losses}  {elo_diff(result)}")


def cmd_elo(args):
    from .evalharness import elo_diff, elo_from_counts, load_match
    if args.log:
        print(elo_diff(load_match(args.log)))
    else:
        print(elo_from_counts(args.wins, args.draws, args.losses))


def cmd_uci(args):
    from .uci import uci_session
    return uci_session(sys.stdin, sys.stdout, _engine_config(args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probchess")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="sample and perturb positions from game records")
    p.add_argument("--games", help="game file, one game of UCI moves per line")
    p.add_argument("--synth-games", type=int, default=200,
                   help="games to synthesise when no game file is given")
    p.add_argument("--save-games")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("bootstrap", help="train an evaluator on material balance")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("train-eval", help="TD-Leaf self-play training")
    p.add_argument("--weights", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--lam", type=float, default=0.7)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--first-only", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sts", help="EPD file scored during training (default: built-in suite)")
    p.add_argument("--sts-every", type=int, default=10)
    p.add_argument("--log", help="JSON-lines metrics file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("gen-internal", help="sample internal search nodes")
    p.add_argument("--roots", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--nodes", type=int, default=2000)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--rate", type=float, default=0.05)
    p.add_argument("--capacity", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_internal)

    p = sub.add_parser("label", help="label positions with a searched best move")
    p.add_argument("--positions", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--movetime", type=float)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train-movenet", help="train the move-probability network")
    p.add_argument("--records", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--log")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train_movenet)

    p = sub.add_parser("sts", help="score an EPD suite")
    p.add_argument("epd", nargs="?", help="EPD file (default: built-in sanity suite)")
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--movetime", type=float)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_sts)

    p = sub.add_parser("match", help="play engine A against engine B")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--movetime", type=float)
    p.add_argument("--max-moves", type=int, default=300)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--log")
    p.add_argument("--seed", type=int, default=0)
    _add_engine_flags(p, "a_")
    _add_engine_flags(p, "b_")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("elo", help="Elo difference from a match log or W/D/L counts")
    p.add_argument("--log")
    p.add_argument("--wins", type=int, default=0)
    p.add_argument("--draws", type=int, default=0)
    p.add_argument("--losses", type=int, default=0)
    p.set_defaults(func=cmd_elo)

    p = sub.add_parser("uci", help="speak UCI on stdin/stdout")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_uci)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return args.func(args) or 0
