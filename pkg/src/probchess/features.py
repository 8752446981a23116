"""Fixed-length board encoding shared by the evaluator and the move network.

Layout (indices into the flat vector):

* position-centric: side to move (1 = white), 4 castling flags
  (white long, white short, black long, black short), 10 material counts
  (Q, R, B, N, P for white then black).
* piece-centric: 16 slots per side (K, Q, R, R, B, B, N, N, P x 8), each
  ``[present, x, y, lowest attacker, lowest defender]``; then sliding mobility
  per side: queen (8 directions), rook slots (N, E, S, W), bishop slots
  (NE, SE, SW, NW), each distance divided by 7.
* square-centric: for the side to move, the lowest-valued enemy attacker of
  each square (64), then the lowest-valued own defender of each square (64).

Attacker/defender values are the piece ordinal (P=1 ... K=6) divided by 6.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chesscore import (BISHOP, BISHOP_DIRS, BLACK, BLACK_LONG, BLACK_SHORT, KING,
                        KING_TARGETS, KNIGHT, KNIGHT_TARGETS, PAWN, PAWN_ATTACKS,
                        QUEEN, QUEEN_DIRS, RAYS, ROOK, ROOK_DIRS, WHITE, WHITE_LONG,
                        WHITE_SHORT, Position)

SLOT_KINDS = (KING, QUEEN, ROOK, ROOK, BISHOP, BISHOP, KNIGHT, KNIGHT) + (PAWN,) * 8
SLOT_FIELDS = 5
SLOTS_PER_SIDE = len(SLOT_KINDS)
MATERIAL_KINDS = (QUEEN, ROOK, BISHOP, KNIGHT, PAWN)
# (slot index, directions) for each sliding slot.
SLIDING_SLOTS = ((1, QUEEN_DIRS), (2, ROOK_DIRS), (3, ROOK_DIRS), (4, BISHOP_DIRS), (5, BISHOP_DIRS))
MOBILITY_PER_SIDE = sum(len(d) for _, d in SLIDING_SLOTS)


@dataclass(frozen=True)
class FeatureLayout:
    """Self-describing layout: ordered (group name, width) pairs."""

    groups: tuple

    @property
    def size(self) -> int:
        return sum(w for _, w in self.groups)

    @property
    def boundaries(self) -> list:
        out, start = [], 0
        for _, w in self.groups:
            out.append((start, start + w))
            start += w
        return out

    def group_slice(self, name: str) -> slice:
        for (n, _), (a, b) in zip(self.groups, self.boundaries):
            if n == name:
                return slice(a, b)
        raise KeyError(name)


POSITION_WIDTH = 1 + 4 + 2 * len(MATERIAL_KINDS)
PIECE_WIDTH = 2 * SLOTS_PER_SIDE * SLOT_FIELDS + 2 * MOBILITY_PER_SIDE
SQUARE_WIDTH = 128
LAYOUT = FeatureLayout((("position", POSITION_WIDTH), ("piece", PIECE_WIDTH), ("square", SQUARE_WIDTH)))
NUM_FEATURES = LAYOUT.size

_SLOT_BASE = POSITION_WIDTH
_MOBILITY_BASE = _SLOT_BASE + 2 * SLOTS_PER_SIDE * SLOT_FIELDS
_SQUARE_BASE = POSITION_WIDTH + PIECE_WIDTH


class SlotAssignment(NamedTuple):
    """Square (or -1 when absent) per slot, in SLOT_KINDS order, per side."""

    white: tuple
    black: tuple

    def for_color(self, color: int) -> tuple:
        return self.white if color == WHITE else self.black


def _assign_side(board: list, color: int) -> tuple:
    # Squares are visited from the owner's back rank forward so that the
    # assignment is mirror-symmetric between colours.
    by_kind = {k: [] for k in (KING, QUEEN, ROOK, BISHOP, KNIGHT, PAWN)}
    flip = 0 if color == WHITE else 56
    for rel in range(64):
        sq = rel ^ flip
        pc = board[sq]
        if pc * color > 0:
            by_kind[pc * color].append(sq)
    slots = [-1] * SLOTS_PER_SIDE
    slots[0] = by_kind[KING][0]
    if by_kind[QUEEN]:
        slots[1] = by_kind[QUEEN][0]
    for kind, first in ((ROOK, 2), (BISHOP, 4), (KNIGHT, 6)):
        for i, sq in enumerate(by_kind[kind][:2]):
            slots[first + i] = sq

    # Pawns: one pawn per file takes its own file's slot (the one nearest its
    # own back rank); the rest spill to the nearest free slot, rightwards first.
    pawn_slots = [-1] * 8
    leftovers = []
    for sq in sorted(by_kind[PAWN], key=lambda s: (s & 7, (s >> 3) * color)):
        f = sq & 7
        if pawn_slots[f] < 0:
            pawn_slots[f] = sq
        else:
            leftovers.append(sq)
    for sq in leftovers:
        f = sq & 7
        for k in list(range(f + 1, 8)) + list(range(f - 1, -1, -1)):
            if pawn_slots[k] < 0:
                pawn_slots[k] = sq
                break
    slots[8:] = pawn_slots
    return tuple(slots)


def assign_slots(p: Position) -> SlotAssignment:
    return SlotAssignment(_assign_side(p.board, WHITE), _assign_side(p.board, BLACK))


def mobility(p: Position, sq: int) -> list:
    """Raw per-direction slide distances (not normalised) for the piece on ``sq``.

    Directions follow the piece's own direction tuple (queen: N..NW clockwise,
    rook: N, E, S, W, bishop: NE, SE, SW, NW).
    """
    kind = abs(p.board[sq])
    dirs = {QUEEN: QUEEN_DIRS, ROOK: ROOK_DIRS, BISHOP: BISHOP_DIRS}[kind]
    return [_slide(p.board, sq, d) for d in dirs]


def _slide(board: list, sq: int, d: int) -> int:
    n = 0
    for t in RAYS[sq][d]:
        if board[t]:
            break
        n += 1
    return n


def lowest_attackers(board: list, color: int) -> list:
    """Per square, the ordinal of the lowest-valued ``color`` piece attacking it (0: none).

    Pseudo-legal reach: pins are ignored, en passant and castling excluded.
    """
    out = [0] * 64
    for sq, pc in enumerate(board):
        if pc * color <= 0:
            continue
        kind = pc * color
        if kind == PAWN:
            targets = PAWN_ATTACKS[color][sq]
        elif kind == KNIGHT:
            targets = KNIGHT_TARGETS[sq]
        elif kind == KING:
            targets = KING_TARGETS[sq]
        else:
            dirs = ROOK_DIRS if kind == ROOK else BISHOP_DIRS if kind == BISHOP else QUEEN_DIRS
            rays = RAYS[sq]
            for d in dirs:
                for t in rays[d]:
                    cur = out[t]
                    if cur == 0 or kind < cur:
                        out[t] = kind
                    if board[t]:
                        break
            continue
        for t in targets:
            cur = out[t]
            if cur == 0 or kind < cur:
                out[t] = kind
    return out


def attack_defend_maps(p: Position) -> tuple:
    """(attackers, defenders) relative to the side to move, as ordinals 0..6."""
    return lowest_attackers(p.board, -p.turn), lowest_attackers(p.board, p.turn)


def extract(p: Position, out: np.ndarray | None = None) -> np.ndarray:
    """Encode ``p`` as a float32 vector of length NUM_FEATURES."""
    v = out if out is not None else np.empty(NUM_FEATURES, dtype=np.float32)
    v[:] = _extract_list(p)
    return v


def extract_many(positions) -> np.ndarray:
    return np.array([_extract_list(p) for p in positions], dtype=np.float32)


def _extract_list(p: Position) -> list:
    board = p.board
    c = p.castling
    f = [1.0 if p.turn == WHITE else 0.0,
         1.0 if c & WHITE_LONG else 0.0, 1.0 if c & WHITE_SHORT else 0.0,
         1.0 if c & BLACK_LONG else 0.0, 1.0 if c & BLACK_SHORT else 0.0]
    for color in (WHITE, BLACK):
        for kind in MATERIAL_KINDS:
            f.append(float(board.count(color * kind)))

    white_att = lowest_attackers(board, WHITE)
    black_att = lowest_attackers(board, BLACK)
    slots = assign_slots(p)
    mob = []
    for color, own_map, enemy_map in ((WHITE, white_att, black_att), (BLACK, black_att, white_att)):
        side = slots.for_color(color)
        for sq in side:
            if sq < 0:
                f.extend((0.0, 0.0, 0.0, 0.0, 0.0))
            else:
                f.extend((1.0, (sq & 7) / 7.0, (sq >> 3) / 7.0,
                          enemy_map[sq] / 6.0, own_map[sq] / 6.0))
        for slot, dirs in SLIDING_SLOTS:
            sq = side[slot]
            if sq < 0:
                mob.extend([0.0] * len(dirs))
            else:
                mob.extend(_slide(board, sq, d) / 7.0 for d in dirs)
    f.extend(mob)

    if p.turn == WHITE:
        attackers, defenders = black_att, white_att
    else:
        attackers, defenders = white_att, black_att
    f.extend(a / 6.0 for a in attackers)
    f.extend(d / 6.0 for d in defenders)
    return f


# -- colour symmetry -------------------------------------------------------

_MIRROR_DIR = {0: 4, 1: 3, 2: 2, 3: 1, 4: 0, 5: 7, 6: 6, 7: 5}


def _color_swap_permutation() -> np.ndarray:
    perm = np.arange(NUM_FEATURES)
    # castling: white long <-> black long, white short <-> black short
    perm[1], perm[2], perm[3], perm[4] = 3, 4, 1, 2
    for i in range(5):
        perm[5 + i], perm[10 + i] = 10 + i, 5 + i

    half = SLOTS_PER_SIDE * SLOT_FIELDS
    for i in range(half):
        perm[_SLOT_BASE + i] = _SLOT_BASE + half + i
        perm[_SLOT_BASE + half + i] = _SLOT_BASE + i

    # Mobility: swap sides, and N<->S style mirroring within each slot.
    offsets, k = [], 0
    for _, dirs in SLIDING_SLOTS:
        offsets.append((k, dirs))
        k += len(dirs)
    for side in (0, 1):
        src_base = _MOBILITY_BASE + side * MOBILITY_PER_SIDE
        dst_base = _MOBILITY_BASE + (1 - side) * MOBILITY_PER_SIDE
        for off, dirs in offsets:
            for j, d in enumerate(dirs):
                perm[dst_base + off + dirs.index(_MIRROR_DIR[d])] = src_base + off + j

    for block in (0, 64):
        for sq in range(64):
            perm[_SQUARE_BASE + block + sq] = _SQUARE_BASE + block + (sq ^ 56)
    return perm


COLOR_SWAP_PERMUTATION = _color_swap_permutation()


def color_swap(v: np.ndarray) -> np.ndarray:
    """Feature vector of the colour-flipped, vertically mirrored position.

    An index permutation plus complementing the side-to-move flag. Slot
    coordinates need no change beyond ``y -> 1 - y`` which is applied here too.
    """
    out = v[..., COLOR_SWAP_PERMUTATION].copy()
    out[..., 0] = 1.0 - out[..., 0]
    ys = np.arange(_SLOT_BASE + 2, _MOBILITY_BASE, SLOT_FIELDS)
    present = out[..., ys - 2] > 0
    out[..., ys] = np.where(present, np.round(7.0 * (1.0 - out[..., ys])) / 7.0, 0.0)
    return out


def mirror_position(p: Position) -> Position:
    """Colour-flipped, vertically mirrored copy of ``p``."""
    board = [0] * 64
    for sq, pc in enumerate(p.board):
        board[sq ^ 56] = -pc
    c = p.castling
    rights = ((WHITE_SHORT if c & BLACK_SHORT else 0) | (WHITE_LONG if c & BLACK_LONG else 0)
              | (BLACK_SHORT if c & WHITE_SHORT else 0) | (BLACK_LONG if c & WHITE_LONG else 0))
    ep = p.ep ^ 56 if p.ep >= 0 else -1
    return Position(board, -p.turn, rights, ep, p.halfmove, p.fullmove)
