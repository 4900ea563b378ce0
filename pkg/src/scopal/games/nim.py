"""Misere Nim with piles (1, 3, 5, 7): whoever takes the last match loses.

Moves are written ``<pile:x, take:y>`` with 1-based pile numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .base import Game, Outcome, Player, IllegalActionError, win_for

INITIAL_PILES = (1, 3, 5, 7)


@dataclass(frozen=True)
class NimState:
    piles: tuple[int, ...]
    to_move: Player
    move_count: int


class Nim(Game):
    name = "nim"
    max_moves = sum(INITIAL_PILES)

    def initial_state(self, chance_seed: int) -> NimState:
        return NimState(INITIAL_PILES, Player.P1, 0)

    def legal_actions(self, state: NimState) -> tuple[tuple[int, int], ...]:
        # canonical order: pile ascending, then take ascending
        return tuple((p, t) for p, n in enumerate(state.piles) for t in range(1, n + 1))

    def apply(self, state: NimState, action: tuple[int, int]) -> NimState:
        pile, take = action
        if not 0 <= pile < len(state.piles):
            raise IllegalActionError(f"nim: pile {pile + 1} does not exist")
        if take < 1:
            raise IllegalActionError("nim: must take at least one match")
        if take > state.piles[pile]:
            raise IllegalActionError(
                f"nim: pile {pile + 1} holds only {state.piles[pile]} match(es)")
        piles = list(state.piles)
        piles[pile] -= take
        return NimState(tuple(piles), state.to_move.other, state.move_count + 1)

    def outcome(self, state: NimState) -> Optional[dict[Player, Outcome]]:
        if any(state.piles):
            return None
        # misere rule: the previous mover took the final match and loses
        return win_for(state.to_move)

    def observation(self, state: NimState, viewer: Player):
        return (viewer.value, viewer is state.to_move, state.piles)

    def observation_key(self, state: NimState, viewer: Player) -> str:
        return ",".join(str(n) for n in state.piles)

    def action_text(self, action: tuple[int, int]) -> str:
        return f"<pile:{action[0] + 1}, take:{action[1]}>"

    def parse_action(self, text: str) -> tuple[int, int]:
        inner = text.strip("<>")
        pile_part, take_part = inner.split(",")
        return int(pile_part.split(":")[1]) - 1, int(take_part.split(":")[1])

    def encode_state(self, state: NimState):
        return {"piles": list(state.piles), "to_move": state.to_move.value,
                "move_count": state.move_count}

    def decode_state(self, data) -> NimState:
        return NimState(tuple(data["piles"]), Player(data["to_move"]), data["move_count"])
