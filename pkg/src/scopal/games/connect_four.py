"""Connect Four on the standard 7x6 grid, bitboard-backed.

Bit layout: bit ``col*7 + row`` with row 0 at the bottom; the 7th bit of
each column is an unused sentinel that keeps shift-based win checks from
wrapping across columns.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .base import Game, Outcome, Player, IllegalActionError, tie_outcome, win_for

COLS = 7
ROWS = 6
_FULL_COL = (1 << ROWS) - 1


def _has_win(bb: int) -> bool:
    for d in (1, 7, 6, 8):  # vertical, horizontal, diag up-left, diag up-right
        m = bb & (bb >> d)
        if m & (m >> (2 * d)):
            return True
    return False


@dataclass(frozen=True)
class C4State:
    p1: int  # bitboard of P1 discs
    p2: int
    to_move: Player
    move_count: int


class ConnectFour(Game):
    name = "connect4"
    max_moves = COLS * ROWS

    def initial_state(self, chance_seed: int) -> C4State:
        return C4State(0, 0, Player.P1, 0)

    def _height(self, state: C4State, col: int) -> int:
        return (((state.p1 | state.p2) >> (col * 7)) & _FULL_COL).bit_count()

    def legal_actions(self, state: C4State) -> tuple[int, ...]:
        # canonical order: column index ascending
        if self.outcome(state) is not None:
            return ()
        both = state.p1 | state.p2
        return tuple(c for c in range(COLS) if not (both >> (c * 7 + ROWS - 1)) & 1)

    def apply(self, state: C4State, action: int) -> C4State:
        if not isinstance(action, int) or not 0 <= action < COLS:
            raise IllegalActionError(f"connect4: column {action!r} is not on the board")
        h = self._height(state, action)
        if h >= ROWS:
            raise IllegalActionError(f"connect4: column C{action + 1} is full")
        bit = 1 << (action * 7 + h)
        if state.to_move is Player.P1:
            return C4State(state.p1 | bit, state.p2, Player.P2, state.move_count + 1)
        return C4State(state.p1, state.p2 | bit, Player.P1, state.move_count + 1)

    def outcome(self, state: C4State) -> Optional[dict[Player, Outcome]]:
        if _has_win(state.p1):
            return win_for(Player.P1)
        if _has_win(state.p2):
            return win_for(Player.P2)
        if state.move_count == self.max_moves:
            return tie_outcome()
        return None

    def observation(self, state: C4State, viewer: Player):
        mine, theirs = (state.p1, state.p2) if viewer is Player.P1 else (state.p2, state.p1)
        return (viewer.value, viewer is state.to_move, (mine, theirs))

    def observation_key(self, state: C4State, viewer: Player) -> str:
        mine, theirs = self.observation(state, viewer)[2]
        cells = []
        for r in range(ROWS - 1, -1, -1):
            for c in range(COLS):
                bit = 1 << (c * 7 + r)
                cells.append("m" if mine & bit else ("o" if theirs & bit else "."))
        return "".join(cells)

    def action_text(self, action: int) -> str:
        return f"C{action + 1}"

    def parse_action(self, text: str) -> int:
        return int(text[1:]) - 1

    def encode_state(self, state: C4State):
        return {"p1": state.p1, "p2": state.p2, "to_move": state.to_move.value,
                "move_count": state.move_count}

    def decode_state(self, data) -> C4State:
        return C4State(data["p1"], data["p2"], Player(data["to_move"]), data["move_count"])

    def random_playout(self, state: C4State, rng: random.Random) -> dict[Player, Outcome]:
        bbs = [state.p1, state.p2]
        if _has_win(bbs[0]):
            return win_for(Player.P1)
        if _has_win(bbs[1]):
            return win_for(Player.P2)
        heights = [self._height(state, c) for c in range(COLS)]
        legal = [c for c in range(COLS) if heights[c] < ROWS]
        tm = 0 if state.to_move is Player.P1 else 1
        randrange = rng.randrange
        while legal:
            c = legal[randrange(len(legal))]
            bbs[tm] |= 1 << (c * 7 + heights[c])
            heights[c] += 1
            if heights[c] == ROWS:
                legal.remove(c)
            if _has_win(bbs[tm]):
                return win_for(Player.P1 if tm == 0 else Player.P2)
            tm ^= 1
        return tie_outcome()
