"""Uniform turn-based game abstraction shared by all six games.

States are immutable values: ``apply`` returns a new state and never touches
its input, so states can be shared freely across episode workers.
"""
from __future__ import annotations

import random
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Hashable, Mapping, Optional, Sequence


class Player(Enum):
    P1 = "P1"
    P2 = "P2"

    @property
    def other(self) -> "Player":
        return Player.P2 if self is Player.P1 else Player.P1


class Outcome(Enum):
    WIN = "Win"
    LOSE = "Lose"
    TIE = "Tie"


OutcomeMap = Mapping[Player, Outcome]


def win_for(player: Player) -> dict[Player, Outcome]:
    return {player: Outcome.WIN, player.other: Outcome.LOSE}


def tie_outcome() -> dict[Player, Outcome]:
    return {Player.P1: Outcome.TIE, Player.P2: Outcome.TIE}


def outcome_value(outcomes: OutcomeMap, player: Player) -> float:
    """Score an outcome for one player: win 1, tie 0.5, loss 0."""
    o = outcomes[player]
    if o is Outcome.WIN:
        return 1.0
    if o is Outcome.TIE:
        return 0.5
    return 0.0


class IllegalActionError(ValueError):
    """Raised when apply() receives an action that breaks a game rule."""


class UnknownGameError(KeyError):
    """Raised for game identifiers outside the supported set."""


class Game(ABC):
    """Rules interface. Subclasses define immutable state/action types.

    Every state exposes ``to_move`` (a Player) and ``move_count`` (int).
    ``legal_actions`` returns actions in a documented canonical order so that
    seeded sampling is reproducible.
    """

    name: str
    max_moves: int
    perfect_information: bool = True

    @abstractmethod
    def initial_state(self, chance_seed: int) -> Any:
        ...

    @abstractmethod
    def legal_actions(self, state: Any) -> tuple:
        ...

    @abstractmethod
    def apply(self, state: Any, action: Any) -> Any:
        ...

    @abstractmethod
    def outcome(self, state: Any) -> Optional[dict[Player, Outcome]]:
        ...

    @abstractmethod
    def observation(self, state: Any, viewer: Player) -> Hashable:
        """Viewer-relative observation; never exposes hidden information."""

    @abstractmethod
    def observation_key(self, state: Any, viewer: Player) -> str:
        """Deterministic text encoding of observation(). Must not contain '|'."""

    @abstractmethod
    def action_text(self, action: Any) -> str:
        ...

    @abstractmethod
    def parse_action(self, text: str) -> Any:
        ...

    @abstractmethod
    def encode_state(self, state: Any) -> Any:
        """JSON-able encoding, inverse of decode_state."""

    @abstractmethod
    def decode_state(self, data: Any) -> Any:
        ...

    # -- defaults ------------------------------------------------------

    def is_terminal(self, state: Any) -> bool:
        return self.outcome(state) is not None

    def relative_action(self, state: Any, action: Any) -> Any:
        """Action re-expressed in the mover's observation coordinates.

        Identity unless the game's observation is mirrored per seat
        (Breakthrough flips the board for P2).
        """
        return action

    def relative_action_text(self, state: Any, action: Any) -> str:
        """Action text from the mover's perspective (used only in keys)."""
        return self.action_text(self.relative_action(state, action))

    def canonical_state_key(self, state: Any) -> str:
        return f"{self.name}|{self.observation_key(state, state.to_move)}"

    def canonical_key(self, state: Any, action: Any) -> str:
        """Counting identity for one (state, action) pair.

        Built from the mover's observation, so states differing only in the
        opponent's hidden card/die share keys, and mirrored seats aggregate.
        """
        return f"{self.canonical_state_key(state)}|{self.relative_action_text(state, action)}"

    def determinize(self, state: Any, viewer: Player, rng: random.Random) -> Any:
        """Resample hidden information consistently with viewer's observation.

        Identity for perfect-information games.
        """
        return state

    def random_playout(self, state: Any, rng: random.Random) -> dict[Player, Outcome]:
        """Play uniformly random legal moves to termination.

        Subclasses override with faster specialized loops; behavior contract
        is the same (some terminal outcome of a uniformly random playout).
        """
        s = state
        out = self.outcome(s)
        while out is None:
            acts = self.legal_actions(s)
            s = self.apply(s, acts[rng.randrange(len(acts))])
            out = self.outcome(s)
        return out


def split_key(key: str) -> tuple[str, str]:
    """Split a canonical (state, action) key into (state key, action part)."""
    state_key, _, action_part = key.rpartition("|")
    return state_key, action_part
