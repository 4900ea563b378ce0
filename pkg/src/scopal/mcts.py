"""UCT Monte Carlo tree search with a tunable simulation budget.

One search = ``max_simulations`` iterations of select / expand / rollout /
backpropagate. Node statistics are credited to the player who chooses the
node (the mover at its parent), so UCT selection maximizes each mover's own
win estimate; the root is credited to the searching player.

Hidden-information games are handled by determinizing once per simulation:
the opponent's private card/die is resampled consistently with the searching
player's observation at the root. Public legal-action sets in these games do
not depend on the hidden sample, so one tree serves all determinizations.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .games import Game, Player, outcome_value


@dataclass
class MctsConfig:
    max_simulations: int = 1000
    rollout_count: int = 1
    exploration_c: float = 2.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_simulations < 1:
            raise ValueError("max_simulations must be >= 1")
        if self.rollout_count < 1:
            raise ValueError("rollout_count must be >= 1")
        if self.exploration_c < 0:
            raise ValueError("exploration_c must be >= 0")


class SearchNode:
    __slots__ = ("wins", "visits", "children", "actions", "next_untried")

    def __init__(self):
        self.wins = 0.0
        self.visits = 0
        self.children: dict = {}
        self.actions = None  # legal actions, filled on first arrival
        self.next_untried = 0


def uct_score(node: SearchNode, parent_visits: int, c: float) -> float:
    """w/n + c*sqrt(ln N / n); callers treat unvisited nodes as +inf."""
    return node.wins / node.visits + c * math.sqrt(math.log(parent_visits) / node.visits)


def mcts_act(game: Game, state, config: MctsConfig):
    """Pick the most-visited root action after the configured simulations.

    Deterministic for a fixed (state, config) including the seed; visit ties
    break toward the lowest canonical action order.
    """
    if game.outcome(state) is not None:
        raise ValueError("mcts_act: state is terminal")
    rng = random.Random(config.rng_seed)
    root_player = state.to_move
    root = SearchNode()
    c = config.exploration_c

    for _ in range(config.max_simulations):
        s = game.determinize(state, root_player, rng)
        node = root
        path = [(root, root_player)]
        outcomes = None
        while True:
            outcomes = game.outcome(s)
            if outcomes is not None:
                values = {p: outcome_value(outcomes, p) for p in Player}
                break
            if node.actions is None:
                node.actions = game.legal_actions(s)
            mover = s.to_move
            if node.next_untried < len(node.actions):
                # expand the first untried action in canonical order
                action = node.actions[node.next_untried]
                node.next_untried += 1
                child = SearchNode()
                node.children[action] = child
                s = game.apply(s, action)
                path.append((child, mover))
                total = {Player.P1: 0.0, Player.P2: 0.0}
                for _ in range(config.rollout_count):
                    rollout = game.random_playout(s, rng)
                    for p in Player:
                        total[p] += outcome_value(rollout, p)
                values = {p: total[p] / config.rollout_count for p in Player}
                break
            # select: all children visited at least once
            best_action = None
            best_score = -math.inf
            parent_visits = node.visits
            for action in node.actions:
                child = node.children[action]
                score = uct_score(child, parent_visits, c)
                if score > best_score:
                    best_score = score
                    best_action = action
            s = game.apply(s, best_action)
            node = node.children[best_action]
            path.append((node, mover))
        for nd, player in path:
            nd.visits += 1
            nd.wins += values[player]

    best_action = None
    best_visits = -1
    for action in root.actions:
        child = root.children.get(action)
        if child is not None and child.visits > best_visits:
            best_visits = child.visits
            best_action = action
    return best_action


def random_act(game: Game, state, seed: int):
    """Uniform draw over the canonical legal-action list."""
    acts = game.legal_actions(state)
    if not acts:
        raise ValueError("random_act: state is terminal")
    return acts[random.Random(seed).randrange(len(acts))]
