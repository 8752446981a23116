"""Rules-correct chess model.

Positions are value objects: every operation returns a fresh ``Position`` and
never mutates its input. The board is a flat 64-entry list (a1 = 0, h8 = 63)
holding signed piece codes, positive for white and negative for black.
"""

from __future__ import annotations

import enum
import random
from typing import NamedTuple

PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = 1, 2, 3, 4, 5, 6
PIECE_TYPES = (PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING)
WHITE, BLACK = 1, -1

PIECE_SYMBOLS = ".pnbrqk"
FILE_NAMES = "abcdefgh"
RANK_NAMES = "12345678"

STARTING_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

# Castling-rights bits.
WHITE_SHORT, WHITE_LONG, BLACK_SHORT, BLACK_LONG = 1, 2, 4, 8

# Ray directions, clockwise from north. Rooks use the even indices, bishops the odd.
DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
DIRECTION_NAMES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
ROOK_DIRS = (0, 2, 4, 6)
BISHOP_DIRS = (1, 3, 5, 7)
QUEEN_DIRS = tuple(range(8))


def square(file: int, rank: int) -> int:
    return rank * 8 + file


def square_name(sq: int) -> str:
    return FILE_NAMES[sq & 7] + RANK_NAMES[sq >> 3]


def parse_square(name: str) -> int:
    if len(name) != 2 or name[0] not in FILE_NAMES or name[1] not in RANK_NAMES:
        raise ValueError(f"bad square name: {name!r}")
    return square(FILE_NAMES.index(name[0]), RANK_NAMES.index(name[1]))


def _build_rays():
    rays = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        per_dir = []
        for df, dr in DIRECTIONS:
            ray = []
            x, y = f + df, r + dr
            while 0 <= x < 8 and 0 <= y < 8:
                ray.append(square(x, y))
                x += df
                y += dr
            per_dir.append(tuple(ray))
        rays.append(tuple(per_dir))
    return tuple(rays)


def _build_steps(deltas):
    out = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        out.append(tuple(square(f + df, r + dr) for df, dr in deltas
                         if 0 <= f + df < 8 and 0 <= r + dr < 8))
    return tuple(out)


RAYS = _build_rays()
KNIGHT_TARGETS = _build_steps(((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)))
KING_TARGETS = _build_steps(DIRECTIONS)
# PAWN_ATTACKS[color][sq]: squares attacked by a pawn of `color` standing on sq.
PAWN_ATTACKS = {
    WHITE: _build_steps(((-1, 1), (1, 1))),
    BLACK: _build_steps(((-1, -1), (1, -1))),
}

# Castling rights that survive a move touching a given square.
_CASTLE_MASK = [15] * 64
_CASTLE_MASK[4] = 15 & ~(WHITE_SHORT | WHITE_LONG)
_CASTLE_MASK[0] = 15 & ~WHITE_LONG
_CASTLE_MASK[7] = 15 & ~WHITE_SHORT
_CASTLE_MASK[60] = 15 & ~(BLACK_SHORT | BLACK_LONG)
_CASTLE_MASK[56] = 15 & ~BLACK_LONG
_CASTLE_MASK[63] = 15 & ~BLACK_SHORT


def _zobrist_tables():
    rng = random.Random(0x5EED_C0DE)
    pieces = {}
    for code in (1, 2, 3, 4, 5, 6, -1, -2, -3, -4, -5, -6):
        pieces[code] = tuple(rng.getrandbits(64) for _ in range(64))
    castle_bits = [rng.getrandbits(64) for _ in range(4)]
    castle = []
    for rights in range(16):
        h = 0
        for bit in range(4):
            if rights & (1 << bit):
                h ^= castle_bits[bit]
        castle.append(h)
    ep = tuple(rng.getrandbits(64) for _ in range(8))
    return pieces, tuple(castle), ep, rng.getrandbits(64)


ZOBRIST_PIECE, ZOBRIST_CASTLE, ZOBRIST_EP, ZOBRIST_BLACK = _zobrist_tables()


class Move(NamedTuple):
    from_sq: int
    to_sq: int
    piece: int
    promotion: int = 0
    captured: int = 0
    castle: bool = False
    en_passant: bool = False

    @property
    def is_capture(self) -> bool:
        return self.captured != 0

    def uci(self) -> str:
        s = square_name(self.from_sq) + square_name(self.to_sq)
        if self.promotion:
            s += PIECE_SYMBOLS[self.promotion]
        return s

    def __str__(self) -> str:
        return self.uci()

    def __repr__(self) -> str:
        return f"Move({self.uci()})"


class GameState(enum.Enum):
    ONGOING = "ongoing"
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    DRAW_REPETITION = "repetition"
    DRAW_FIFTY_MOVES = "fifty-moves"
    DRAW_INSUFFICIENT_MATERIAL = "insufficient-material"

    @property
    def is_terminal(self) -> bool:
        return self is not GameState.ONGOING

    @property
    def is_draw(self) -> bool:
        return self not in (GameState.ONGOING, GameState.CHECKMATE)


class FenError(ValueError):
    """Malformed or illegal FEN. ``field`` names the offending FEN field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def is_attacked(board: list, sq: int, by: int) -> bool:
    """True when any piece of color ``by`` attacks ``sq`` (pins ignored)."""
    knight, king = by * KNIGHT, by * KING
    for t in KNIGHT_TARGETS[sq]:
        if board[t] == knight:
            return True
    for t in KING_TARGETS[sq]:
        if board[t] == king:
            return True
    pawn = by * PAWN
    for t in PAWN_ATTACKS[-by][sq]:
        if board[t] == pawn:
            return True
    rook, bishop, queen = by * ROOK, by * BISHOP, by * QUEEN
    rays = RAYS[sq]
    for d in ROOK_DIRS:
        for t in rays[d]:
            pc = board[t]
            if pc:
                if pc == rook or pc == queen:
                    return True
                break
    for d in BISHOP_DIRS:
        for t in rays[d]:
            pc = board[t]
            if pc:
                if pc == bishop or pc == queen:
                    return True
                break
    return False


class Position:
    """Immutable chess position.

    ``history`` holds the hashes of every position since the last irreversible
    move, ending with this position's own hash.
    """

    __slots__ = ("board", "turn", "castling", "ep", "halfmove", "fullmove",
                 "hash", "history", "kings", "_moves", "_check")

    def __init__(self, board, turn=WHITE, castling=0, ep=-1, halfmove=0, fullmove=1,
                 history=None):
        self.board = list(board)
        self.turn = turn
        self.castling = castling
        self.ep = ep
        self.halfmove = halfmove
        self.fullmove = fullmove
        self.kings = (self.board.index(KING), self.board.index(-KING))
        self.hash = _hash_from_scratch(self)
        self.history = tuple(history) if history else (self.hash,)
        self._moves = None
        self._check = None

    @classmethod
    def start(cls) -> "Position":
        return parse_fen(STARTING_FEN)

    # -- queries -----------------------------------------------------------

    def piece_at(self, sq: int) -> int:
        return self.board[sq]

    def king_square(self, color: int) -> int:
        return self.kings[0] if color == WHITE else self.kings[1]

    def in_check(self) -> bool:
        if self._check is None:
            self._check = is_attacked(self.board, self.king_square(self.turn), -self.turn)
        return self._check

    def legal_moves(self) -> list:
        """Cached legal move list. Callers must not mutate it."""
        if self._moves is None:
            self._moves = _generate_legal(self)
        return self._moves

    def draw_by_rule(self) -> bool:
        """Fifty-move rule or insufficient material (repetition is path dependent)."""
        return self.halfmove >= 100 or insufficient_material(self)

    def apply(self, move: Move) -> "Position":
        return apply_move(self, move)

    def fen(self) -> str:
        return emit_fen(self)

    def find_move(self, uci: str) -> Move:
        for m in self.legal_moves():
            if m.uci() == uci:
                return m
        raise ValueError(f"illegal move {uci!r} in {self.fen()}")

    def count(self, color: int, kind: int) -> int:
        return self.board.count(color * kind)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Position) and self.board == other.board
                and self.turn == other.turn and self.castling == other.castling
                and self.ep == other.ep and self.halfmove == other.halfmove
                and self.fullmove == other.fullmove)

    def __hash__(self) -> int:
        return self.hash

    def __repr__(self) -> str:
        return f"Position({self.fen()!r})"

    def __str__(self) -> str:
        rows = []
        for r in range(7, -1, -1):
            row = []
            for f in range(8):
                pc = self.board[square(f, r)]
                sym = PIECE_SYMBOLS[abs(pc)]
                row.append(sym.upper() if pc > 0 else sym)
            rows.append(" ".join(row))
        return "\n".join(rows)


def _hash_from_scratch(p: Position) -> int:
    h = 0
    for sq, pc in enumerate(p.board):
        if pc:
            h ^= ZOBRIST_PIECE[pc][sq]
    h ^= ZOBRIST_CASTLE[p.castling]
    if p.ep >= 0:
        h ^= ZOBRIST_EP[p.ep & 7]
    if p.turn == BLACK:
        h ^= ZOBRIST_BLACK
    return h


def position_hash(p: Position, from_scratch: bool = False) -> int:
    """64-bit Zobrist hash. ``from_scratch`` recomputes it instead of using the
    incrementally maintained value."""
    return _hash_from_scratch(p) if from_scratch else p.hash


# -- FEN -------------------------------------------------------------------

_FEN_PIECES = {"P": PAWN, "N": KNIGHT, "B": BISHOP, "R": ROOK, "Q": QUEEN, "K": KING}


def parse_fen(text: str) -> Position:
    fields = text.split()
    if len(fields) == 4:
        fields += ["0", "1"]
    if len(fields) != 6:
        raise FenError("fields", f"expected 6 fields, got {len(fields)}")
    placement, stm, castling, ep, half, full = fields

    ranks = placement.split("/")
    if len(ranks) != 8:
        raise FenError("placement", f"expected 8 ranks, got {len(ranks)}")
    board = [0] * 64
    for i, row in enumerate(ranks):
        r = 7 - i
        f = 0
        for ch in row:
            if ch.isdigit():
                f += int(ch)
            elif ch.upper() in _FEN_PIECES:
                if f > 7:
                    raise FenError("placement", f"rank {r + 1} too long")
                kind = _FEN_PIECES[ch.upper()]
                board[square(f, r)] = kind if ch.isupper() else -kind
                f += 1
            else:
                raise FenError("placement", f"illegal piece character {ch!r}")
        if f != 8:
            raise FenError("placement", f"rank {r + 1} has {f} files")

    if stm not in ("w", "b"):
        raise FenError("side", f"bad side to move {stm!r}")
    turn = WHITE if stm == "w" else BLACK

    rights = 0
    if castling != "-":
        for ch in castling:
            bit = {"K": WHITE_SHORT, "Q": WHITE_LONG, "k": BLACK_SHORT, "q": BLACK_LONG}.get(ch)
            if bit is None:
                raise FenError("castling", f"bad castling flag {ch!r}")
            rights |= bit

    ep_sq = -1
    if ep != "-":
        try:
            ep_sq = parse_square(ep)
        except ValueError:
            raise FenError("en-passant", f"bad square {ep!r}") from None
        if (ep_sq >> 3) != (5 if turn == WHITE else 2):
            raise FenError("en-passant", f"{ep} is on the wrong rank")

    try:
        halfmove, fullmove = int(half), int(full)
    except ValueError:
        raise FenError("counters", "move counters must be integers") from None
    if halfmove < 0 or fullmove < 1:
        raise FenError("counters", "move counters out of range")

    if board.count(KING) != 1 or board.count(-KING) != 1:
        raise FenError("placement", "each side needs exactly one king")
    for sq in list(range(8)) + list(range(56, 64)):
        if abs(board[sq]) == PAWN:
            raise FenError("placement", f"pawn on back rank at {square_name(sq)}")
    for bit, king_sq, rook_sq, color in ((WHITE_SHORT, 4, 7, WHITE), (WHITE_LONG, 4, 0, WHITE),
                                         (BLACK_SHORT, 60, 63, BLACK), (BLACK_LONG, 60, 56, BLACK)):
        if rights & bit and (board[king_sq] != color * KING or board[rook_sq] != color * ROOK):
            raise FenError("castling", "castling right without king and rook on home squares")

    p = Position(board, turn, rights, ep_sq, halfmove, fullmove)
    if is_attacked(p.board, p.king_square(-turn), turn):
        raise FenError("placement", "side not to move is in check")
    return p


def emit_fen(p: Position) -> str:
    rows = []
    for r in range(7, -1, -1):
        row, empty = "", 0
        for f in range(8):
            pc = p.board[square(f, r)]
            if pc == 0:
                empty += 1
                continue
            if empty:
                row += str(empty)
                empty = 0
            sym = PIECE_SYMBOLS[abs(pc)]
            row += sym.upper() if pc > 0 else sym
        if empty:
            row += str(empty)
        rows.append(row)
    rights = "".join(ch for bit, ch in ((WHITE_SHORT, "K"), (WHITE_LONG, "Q"),
                                         (BLACK_SHORT, "k"), (BLACK_LONG, "q"))
                     if p.castling & bit) or "-"
    ep = square_name(p.ep) if p.ep >= 0 else "-"
    stm = "w" if p.turn == WHITE else "b"
    return f"{'/'.join(rows)} {stm} {rights} {ep} {p.halfmove} {p.fullmove}"


# -- move generation -------------------------------------------------------

def _line_between(a: int, d: int, b: int) -> set:
    """Squares strictly after ``a`` along direction ``d`` up to and including ``b``."""
    out = set()
    for t in RAYS[a][d]:
        out.add(t)
        if t == b:
            break
    return out


def _generate_legal(p: Position) -> list:
    board = p.board
    us = p.turn
    them = -us
    ks = p.king_square(us)
    moves = []
    add = moves.append

    # Checkers and pins, found by scanning outward from our king.
    checkers = []
    block = None  # squares that resolve a single check (capture or interpose)
    pins = {}  # pinned square -> allowed target squares
    rays = RAYS[ks]
    for d in QUEEN_DIRS:
        slider = ROOK if d % 2 == 0 else BISHOP
        own = -1
        for t in rays[d]:
            pc = board[t]
            if not pc:
                continue
            if pc * us > 0:
                if own >= 0:
                    break
                own = t
                continue
            kind = -pc * us
            if kind == slider or kind == QUEEN:
                if own >= 0:
                    pins[own] = _line_between(ks, d, t)
                else:
                    checkers.append(t)
                    block = _line_between(ks, d, t)
            break
    for t in KNIGHT_TARGETS[ks]:
        if board[t] == them * KNIGHT:
            checkers.append(t)
            block = {t}
    for t in PAWN_ATTACKS[us][ks]:
        if board[t] == them * PAWN:
            checkers.append(t)
            block = {t}

    # King moves: the king is lifted so sliders see through its old square.
    board[ks] = 0
    for t in KING_TARGETS[ks]:
        pc = board[t]
        if pc * us > 0:
            continue
        if not is_attacked(board, t, them):
            add(Move(ks, t, KING, 0, abs(pc)))
    board[ks] = us * KING

    if len(checkers) > 1:
        return moves

    if not checkers and p.castling:
        if us == WHITE:
            if (p.castling & WHITE_SHORT and not board[5] and not board[6]
                    and not is_attacked(board, 5, them) and not is_attacked(board, 6, them)):
                add(Move(4, 6, KING, 0, 0, True))
            if (p.castling & WHITE_LONG and not board[3] and not board[2] and not board[1]
                    and not is_attacked(board, 3, them) and not is_attacked(board, 2, them)):
                add(Move(4, 2, KING, 0, 0, True))
        else:
            if (p.castling & BLACK_SHORT and not board[61] and not board[62]
                    and not is_attacked(board, 61, them) and not is_attacked(board, 62, them)):
                add(Move(60, 62, KING, 0, 0, True))
            if (p.castling & BLACK_LONG and not board[59] and not board[58] and not board[57]
                    and not is_attacked(board, 59, them) and not is_attacked(board, 58, them)):
                add(Move(60, 58, KING, 0, 0, True))

    promo_rank = 7 if us == WHITE else 0
    start_rank = 1 if us == WHITE else 6
    fwd = 8 * us
    ep = p.ep

    for sq in range(64):
        pc = board[sq]
        if pc * us <= 0:
            continue
        kind = pc * us
        if kind == KING:
            continue
        allowed = pins.get(sq)
        if block is not None:
            allowed = block if allowed is None else (allowed & block)

        if kind == PAWN:
            targets = []
            t = sq + fwd
            if not board[t]:
                targets.append((t, 0))
                if (sq >> 3) == start_rank and not board[t + fwd]:
                    targets.append((t + fwd, 0))
            for t in PAWN_ATTACKS[us][sq]:
                victim = board[t]
                if victim * us < 0:
                    targets.append((t, -victim * us))
                elif t == ep:
                    if _ep_is_legal(board, sq, t, us, ks):
                        add(Move(sq, t, PAWN, 0, PAWN, False, True))
            for t, cap in targets:
                if allowed is not None and t not in allowed:
                    continue
                if (t >> 3) == promo_rank:
                    for promo in (QUEEN, ROOK, BISHOP, KNIGHT):
                        add(Move(sq, t, PAWN, promo, cap))
                else:
                    add(Move(sq, t, PAWN, 0, cap))
        elif kind == KNIGHT:
            if sq in pins:
                continue
            for t in KNIGHT_TARGETS[sq]:
                victim = board[t]
                if victim * us > 0:
                    continue
                if allowed is not None and t not in allowed:
                    continue
                add(Move(sq, t, KNIGHT, 0, -victim * us))
        else:
            dirs = ROOK_DIRS if kind == ROOK else BISHOP_DIRS if kind == BISHOP else QUEEN_DIRS
            srays = RAYS[sq]
            for d in dirs:
                for t in srays[d]:
                    victim = board[t]
                    if victim * us > 0:
                        break
                    if allowed is None or t in allowed:
                        add(Move(sq, t, kind, 0, -victim * us))
                    if victim:
                        break
    return moves


def _ep_is_legal(board: list, frm: int, to: int, us: int, ks: int) -> bool:
    captured_sq = to - 8 * us
    saved = board[to], board[frm], board[captured_sq]
    board[to], board[frm], board[captured_sq] = us * PAWN, 0, 0
    ok = not is_attacked(board, ks, -us)
    board[to], board[frm], board[captured_sq] = saved
    return ok


def generate_moves(p: Position) -> list:
    """All legal moves of ``p`` (empty at checkmate or stalemate)."""
    return list(p.legal_moves())


def apply_move(p: Position, m: Move) -> Position:
    board = p.board[:]
    us = p.turn
    frm, to = m.from_sq, m.to_sq
    moving = board[frm]
    zp = ZOBRIST_PIECE
    h = p.hash ^ ZOBRIST_BLACK ^ ZOBRIST_CASTLE[p.castling]
    if p.ep >= 0:
        h ^= ZOBRIST_EP[p.ep & 7]

    h ^= zp[moving][frm]
    board[frm] = 0
    if m.en_passant:
        cap_sq = to - 8 * us
        h ^= zp[board[cap_sq]][cap_sq]
        board[cap_sq] = 0
    elif board[to]:
        h ^= zp[board[to]][to]
    placed = us * m.promotion if m.promotion else moving
    board[to] = placed
    h ^= zp[placed][to]

    if m.castle:
        if to > frm:
            rfrom, rto = frm + 3, frm + 1
        else:
            rfrom, rto = frm - 4, frm - 1
        rook = board[rfrom]
        board[rfrom] = 0
        board[rto] = rook
        h ^= zp[rook][rfrom] ^ zp[rook][rto]

    castling = p.castling & _CASTLE_MASK[frm] & _CASTLE_MASK[to]
    h ^= ZOBRIST_CASTLE[castling]

    ep = -1
    if m.piece == PAWN and abs(to - frm) == 16:
        ep = (frm + to) // 2
        h ^= ZOBRIST_EP[ep & 7]

    irreversible = m.piece == PAWN or m.captured
    child = Position.__new__(Position)
    child.board = board
    child.turn = -us
    child.castling = castling
    child.ep = ep
    child.halfmove = 0 if irreversible else p.halfmove + 1
    child.fullmove = p.fullmove + (1 if us == BLACK else 0)
    child.hash = h
    child.history = (h,) if irreversible else p.history + (h,)
    if m.piece == KING:
        child.kings = (to, p.kings[1]) if us == WHITE else (p.kings[0], to)
    else:
        child.kings = p.kings
    child._moves = None
    child._check = None
    return child


# -- game state ------------------------------------------------------------

def insufficient_material(p: Position) -> bool:
    minors = []
    for sq, pc in enumerate(p.board):
        kind = abs(pc)
        if kind in (PAWN, ROOK, QUEEN):
            return False
        if kind in (KNIGHT, BISHOP):
            minors.append((sq, pc))
            if len(minors) > 2:
                return False
    if len(minors) <= 1:
        return True
    (s1, p1), (s2, p2) = minors
    # Lone bishops on each side standing on same-coloured squares cannot mate.
    if abs(p1) == BISHOP and abs(p2) == BISHOP and p1 == -p2:
        return ((s1 >> 3) + (s1 & 7)) % 2 == ((s2 >> 3) + (s2 & 7)) % 2
    return False


def repetition_count(p: Position) -> int:
    return p.history.count(p.hash)


def game_state(p: Position) -> GameState:
    if not p.legal_moves():
        return GameState.CHECKMATE if p.in_check() else GameState.STALEMATE
    if insufficient_material(p):
        return GameState.DRAW_INSUFFICIENT_MATERIAL
    if p.halfmove >= 100:
        return GameState.DRAW_FIFTY_MOVES
    if repetition_count(p) >= 3:
        return GameState.DRAW_REPETITION
    return GameState.ONGOING


def perft(p: Position, depth: int) -> int:
    if depth == 0:
        return 1
    moves = p.legal_moves()
    if depth == 1:
        return len(moves)
    return sum(perft(apply_move(p, m), depth - 1) for m in moves)


# -- notation --------------------------------------------------------------

def parse_uci(p: Position, text: str) -> Move:
    return p.find_move(text.strip().lower())


def san(p: Position, m: Move) -> str:
    """Standard algebraic notation for a legal move of ``p``."""
    if m.castle:
        s = "O-O" if m.to_sq > m.from_sq else "O-O-O"
    else:
        target = square_name(m.to_sq)
        if m.piece == PAWN:
            s = (FILE_NAMES[m.from_sq & 7] + "x" if m.captured else "") + target
            if m.promotion:
                s += "=" + PIECE_SYMBOLS[m.promotion].upper()
        else:
            s = PIECE_SYMBOLS[m.piece].upper()
            rivals = [o.from_sq for o in p.legal_moves()
                      if o.piece == m.piece and o.to_sq == m.to_sq and o.from_sq != m.from_sq]
            if rivals:
                if all((r & 7) != (m.from_sq & 7) for r in rivals):
                    s += FILE_NAMES[m.from_sq & 7]
                elif all((r >> 3) != (m.from_sq >> 3) for r in rivals):
                    s += RANK_NAMES[m.from_sq >> 3]
                else:
                    s += square_name(m.from_sq)
            s += ("x" if m.captured else "") + target
    child = apply_move(p, m)
    if child.in_check():
        s += "#" if not child.legal_moves() else "+"
    return s


def parse_san(p: Position, text: str) -> Move:
    """Resolve SAN (or long algebraic) text to a legal move of ``p``."""
    t = text.strip().rstrip("+#!?").replace("0-0-0", "O-O-O").replace("0-0", "O-O")
    for m in p.legal_moves():
        if san(p, m).rstrip("+#") == t:
            return m
    # Tolerate missing capture marks and promotion without '='.
    loose = t.replace("x", "").replace("=", "")
    for m in p.legal_moves():
        if san(p, m).rstrip("+#").replace("x", "").replace("=", "") == loose:
            return m
    try:
        return p.find_move(t.lower())
    except ValueError:
        raise ValueError(f"cannot resolve move {text!r} in {p.fen()}") from None


def material_balance(p: Position, values=(0, 1, 3, 3, 5, 9, 0)) -> int:
    """White-minus-black material in pawn units."""
    total = 0
    for pc in p.board:
        if pc > 0:
            total += values[pc]
        elif pc < 0:
            total -= values[-pc]
    return total
