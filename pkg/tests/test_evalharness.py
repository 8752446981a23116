import json
import math

import pytest

from probchess.chesscore import parse_fen, parse_san
from probchess.engine import EngineConfig
from probchess.evalharness import (EpdError, GameRecord, MatchResult, StsRecord, elo_diff,
                                   elo_from_counts, elo_from_score, load_epd, load_match,
                                   parse_epd, random_openings, random_play_expectation,
                                   run_match, run_sts, sanity_suite)
from probchess.search import material_evaluator


def test_parse_bm_only():
    rec = parse_epd('4k3/8/8/8/8/8/8/R3K3 w Q - bm Ra8+; id "mate.x";')
    p = rec.position
    assert rec.scores == {parse_san(p, "Ra8+"): 10}
    assert rec.theme == "mate" and rec.id == "mate.x"


def test_parse_partial_credit():
    rec = parse_epd('rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - bm e4; '
                    'id "open.1"; c0 "e4=10, d4=8, Nf3=6";')
    p = rec.position
    assert rec.scores[parse_san(p, "e4")] == 10
    assert rec.scores[parse_san(p, "d4")] == 8
    assert rec.score_of(parse_san(p, "a3")) == 0


def test_parse_promotion_in_c0():
    rec = parse_epd('8/3P4/8/8/8/8/k7/4K3 w - - bm d8=Q; id "p.1"; c0 "d8=Q=10, d8=N=2";')
    assert sorted(rec.scores.values()) == [2, 10]


@pytest.mark.parametrize("line", [
    "4k3/8/8 w - -",
    '4k3/8/8/8/8/8/8/R3K3 w - - bm Rb9; id "x";',
    '4k3/8/8/8/8/8/8/R3K3 w - - id "x";',
    '4k3/8/8/8/8/8/8/R3K3 w - - bm Ra8; c0 "Ra8=11";',
    '4k3/8/8/8/8/8/8/R3K3 w - - c0 "Ra8=5";',
    '4k3/8/8/8/8/8/8/R3K3 w - - bm Ra8; id "x',
])
def test_parse_errors(line):
    with pytest.raises(EpdError):
        parse_epd(line, 7)


def test_load_reports_line_number(tmp_path):
    f = tmp_path / "s.epd"
    f.write_text('# comment\n4k3/8/8/8/8/8/8/R3K3 w - - bm Ra8; id "a.1";\nbroken\n')
    with pytest.raises(EpdError) as err:
        load_epd(f)
    assert err.value.line == 3


def test_sanity_suite_is_well_formed():
    suite = sanity_suite()
    assert len(suite) == 20
    for rec in suite:
        legal = rec.position.legal_moves()
        assert legal and all(m in legal for m in rec.scores)
    assert 0 < random_play_expectation(suite) < 10 * len(suite)


def test_random_expectation_oracle():
    rec = StsRecord(parse_fen("7k/8/8/8/8/8/6q1/7K w - - 0 1"),
                    {parse_fen("7k/8/8/8/8/8/6q1/7K w - - 0 1").legal_moves()[0]: 10})
    assert random_play_expectation([rec]) == 10


def test_material_engine_scores_within_bounds():
    suite = sanity_suite()
    res = run_sts(material_evaluator, suite, nodes=500)
    assert 0 <= res.total <= res.maximum == 200
    assert sum(res.by_theme.values()) == res.total
    assert res.by_theme["mate"] == 50  # mate-in-one found with any sane search
    assert res.total > random_play_expectation(suite)


def test_empty_suite_rejected():
    with pytest.raises(ValueError):
        run_sts(material_evaluator, [])


def test_elo_values():
    assert elo_from_score(0.5) == 0
    assert elo_from_score(0.75) == pytest.approx(400 * math.log10(3), abs=1e-9)
    assert elo_from_score(0.75) == pytest.approx(190.85, abs=0.01)
    e = elo_from_counts(1710, 0, 1290)
    s = 0.57
    half = 1.96 * math.sqrt(s * (1 - s) / 3000) * 400 / (math.log(10) * s * (1 - s))
    assert e.difference == pytest.approx(400 * math.log10(s / (1 - s)))
    assert e.difference == pytest.approx(49, abs=0.5)
    assert e.half_width == pytest.approx(half, rel=1e-3)
    assert e.half_width == pytest.approx(12.6, abs=0.1)


def test_elo_with_draws_uses_trinomial_variance():
    e = elo_from_counts(40, 40, 20)
    s = 0.6
    var = (40 * 0.4 ** 2 + 40 * 0.1 ** 2 + 20 * 0.6 ** 2) / 100
    half = 1.959963984540054 * math.sqrt(var / 100) * 400 / (math.log(10) * s * (1 - s))
    assert e.half_width == pytest.approx(half)


def test_elo_antisymmetry():
    for w, d, l in [(10, 3, 7), (1, 0, 9), (123, 77, 45)]:
        a, b = elo_from_counts(w, d, l), elo_from_counts(l, d, w)
        assert a.difference == -b.difference
        assert a.half_width == pytest.approx(b.half_width)


def test_elo_bounds():
    e = elo_from_counts(10, 0, 0)
    assert e.bound == "lower" and math.isinf(e.half_width) and e.difference > 0
    assert str(e).startswith(">=")
    e = elo_from_counts(0, 0, 10)
    assert e.bound == "upper" and e.difference < 0
    with pytest.raises(ValueError):
        elo_from_counts(0, 0, 0)


def test_match_needs_games():
    cfg = EngineConfig()
    with pytest.raises(ValueError):
        run_match(cfg, cfg, 0)
    with pytest.raises(ValueError):
        run_match(cfg, cfg, 3)


def test_openings_are_distinct():
    ops = random_openings(20, seed=5)
    assert len({o.hash for o in ops}) == 20


def test_self_match_is_symmetric(tmp_path):
    cfg = EngineConfig(threshold=1e-2)
    log = tmp_path / "m.jsonl"
    res = run_match(cfg, cfg, 8, nodes=60, max_moves=30, log_path=log, seed=2)
    assert res.played == 8
    # identical deterministic engines: each colour-swapped pair scores exactly 1
    for a, b in zip(res.games[::2], res.games[1::2]):
        assert a.opening == b.opening and a.a_white != b.a_white
        assert a.result + b.result == 1.0
    assert res.score == 0.5
    back = load_match(log)
    assert (back.wins, back.draws, back.losses) == (res.wins, res.draws, res.losses)
    assert json.loads(log.read_text().splitlines()[0])["game"] == 0


def test_swap_reverses_result():
    m = MatchResult()
    for i, r in enumerate([1.0, 0.5, 0.0, 1.0]):
        m.add(GameRecord(i, i // 2, i % 2 == 0, r, "checkmate", 10))
    s = m.swapped()
    assert (s.wins, s.draws, s.losses) == (m.losses, m.draws, m.wins)
    assert elo_diff(s).difference == -elo_diff(m).difference
