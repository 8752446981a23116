import random

import pytest

from probchess.chesscore import Position, game_state

# Positions commonly used for perft debugging: castling, en passant,
# promotions, pins and discovered checks.
PERFT_FENS = [
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
    "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
    "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
    "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
    "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
    "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
    "8/8/8/2k5/2pP4/8/B7/4K3 b - d3 0 3",
    "r3k2r/8/8/8/8/8/8/R3K2R b KQkq - 0 1",
    "8/P1k5/K7/8/8/8/8/8 w - - 0 1",
    "4k3/8/8/8/8/8/8/4K2R w K - 0 1",
    "3k4/3p4/8/K1P4r/8/8/8/8 b - - 0 1",
    "8/8/1k6/2b5/2pP4/8/5K2/8 b - d3 0 1",
]


def random_positions(n, seed=0, max_plies=60, allow_terminal=False):
    """Positions reached by uniform random play from the start."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        pos = Position.start()
        for _ in range(rng.randrange(max_plies + 1)):
            moves = pos.legal_moves()
            if not moves:
                break
            pos = pos.apply(rng.choice(moves))
        if allow_terminal or not game_state(pos).is_terminal:
            out.append(pos)
    return out


@pytest.fixture(scope="session")
def sample_positions():
    return random_positions(60, seed=11)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if rep.when == "call" and "criterion" in props:
                rows.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL",
                             props.get("detail", "")))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, verdict, detail in sorted(rows):
            terminalreporter.write_line(f"{verdict} criterion {name}: {detail}")
