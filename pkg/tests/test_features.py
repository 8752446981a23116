import numpy as np
import pytest

from conftest import random_positions
from probchess.chesscore import Position, parse_fen
from probchess.features import (COLOR_SWAP_PERMUTATION, LAYOUT, NUM_FEATURES, SLOT_FIELDS,
                                assign_slots, attack_defend_maps, color_swap, extract,
                                extract_many, mirror_position, mobility)

SLOT_BASE = 15
BLACK_SLOTS = SLOT_BASE + 16 * SLOT_FIELDS
MOBILITY = SLOT_BASE + 32 * SLOT_FIELDS
SQUARES = 15 + 208


def slot(v, color_base, index):
    return v[color_base + index * SLOT_FIELDS: color_base + (index + 1) * SLOT_FIELDS]


def test_layout_sizes():
    assert LAYOUT.groups == (("position", 15), ("piece", 208), ("square", 128))
    assert NUM_FEATURES == 351
    assert LAYOUT.group_slice("square") == slice(223, 351)
    assert sorted(COLOR_SWAP_PERMUTATION) == list(range(NUM_FEATURES))


def test_start_position_by_hand():
    v = extract(Position.start())
    assert v.dtype == np.float32 and v.shape == (NUM_FEATURES,)
    assert v[0] == 1.0 and list(v[1:5]) == [1, 1, 1, 1]
    assert list(v[5:15]) == [1, 2, 2, 2, 8] * 2
    # white king on e1: defended by the queen (5/6), not attacked
    np.testing.assert_allclose(slot(v, SLOT_BASE, 0), [1, 4 / 7, 0, 0, 5 / 6], rtol=1e-6)
    # black queen on d8: defended by the king
    np.testing.assert_allclose(slot(v, BLACK_SLOTS, 1), [1, 3 / 7, 1, 0, 6 / 6], rtol=1e-6)
    # nothing can slide anywhere
    assert not v[MOBILITY:MOBILITY + 48].any()
    # e3 is covered by the d2/f2 pawns; nothing black reaches it
    assert v[SQUARES + 20] == 0 and v[SQUARES + 64 + 20] == pytest.approx(1 / 6)
    # d6 is attacked by black pawns from the white side's point of view
    assert v[SQUARES + 43] == pytest.approx(1 / 6)


def test_queen_mobility_by_hand():
    p = parse_fen("4k3/8/8/8/3Q4/8/8/4K3 w - - 0 1")
    # N, NE, E, SE, S, SW, W, NW
    assert mobility(p, 27) == [4, 4, 4, 3, 3, 3, 3, 3]
    v = extract(p)
    np.testing.assert_allclose(v[MOBILITY:MOBILITY + 8], np.array([4, 4, 4, 3, 3, 3, 3, 3]) / 7, rtol=1e-6)


def test_absent_pieces_are_zero():
    v = extract(parse_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 1"))
    for i in range(1, 16):
        assert not slot(v, SLOT_BASE, i).any()
        assert not slot(v, BLACK_SLOTS, i).any()


def test_pawn_slots_one_per_file_then_spill():
    # doubled c-pawns: c2 keeps the c slot, c3 spills to the free d slot
    p = parse_fen("4k3/8/8/8/8/2P5/2P5/4K3 w - - 0 1")
    pawns = assign_slots(p).white[8:]
    assert pawns[2] == 10 and pawns[3] == 18
    assert [s for i, s in enumerate(pawns) if i not in (2, 3)] == [-1] * 6
    # spill goes left when everything to the right is taken
    p = parse_fen("4k3/8/8/8/7P/7P/8/4K3 w - - 0 1")
    pawns = assign_slots(p).white[8:]
    assert pawns[7] == 23 and pawns[6] == 31


def test_attack_maps_follow_side_to_move():
    p = parse_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 1")
    att, dfd = attack_defend_maps(p)
    assert dfd[8] == 4 and att[8] == 0  # a2: own rook defends
    q = parse_fen("4k3/8/8/8/8/8/8/R3K3 b - - 0 1")
    att, dfd = attack_defend_maps(q)
    assert att[8] == 4 and dfd[8] == 0


def test_lowest_valued_attacker_wins():
    p = parse_fen("4k3/8/8/8/8/2n5/8/R3K3 b - - 0 1")
    att, dfd = attack_defend_maps(p)
    # a2 defended by black knight (2) and attacked by white rook (4)
    assert dfd[8] == 2 and att[8] == 4


def test_color_swap_matches_mirrored_position():
    for p in random_positions(150, seed=5, max_plies=90, allow_terminal=True):
        np.testing.assert_allclose(extract(mirror_position(p)), color_swap(extract(p)), atol=1e-6)


def test_color_swap_is_an_involution(sample_positions):
    X = extract_many(sample_positions)
    np.testing.assert_allclose(color_swap(color_swap(X)), X, atol=1e-6)


def test_extract_many_matches_extract(sample_positions):
    X = extract_many(sample_positions[:10])
    for p, row in zip(sample_positions[:10], X):
        np.testing.assert_array_equal(extract(p), row)


def test_values_in_unit_range(sample_positions):
    X = extract_many(sample_positions)
    assert X[:, 15:].min() >= 0 and X[:, 15:].max() <= 1
