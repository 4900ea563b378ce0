"""Agents playable in episodes, built from opponent spec strings.

Spec strings: ``random``, ``mcts:<max_simulations>``, ``policy`` (the
in-memory policy being trained), ``self`` (alias used for the opponent
seat in self-play; same policy object), ``policy:<checkpoint-path>``.
"""
from __future__ import annotations

import random

from .games import Game
from .mcts import MctsConfig, mcts_act
from .policy import Policy

LEARNER_SPECS = ("policy", "self")


class Agent:
    label: str = "agent"

    def act(self, game: Game, state, rng: random.Random):
        raise NotImplementedError


class RandomAgent(Agent):
    def __init__(self, label: str = "random"):
        self.label = label

    def act(self, game, state, rng):
        acts = game.legal_actions(state)
        return acts[rng.randrange(len(acts))]


class MctsAgent(Agent):
    def __init__(self, max_simulations: int, rollout_count: int = 1,
                 exploration_c: float = 2.0, label: str | None = None):
        self.max_simulations = max_simulations
        self.rollout_count = rollout_count
        self.exploration_c = exploration_c
        self.label = label or f"mcts:{max_simulations}"

    def act(self, game, state, rng):
        config = MctsConfig(self.max_simulations, self.rollout_count,
                            self.exploration_c, rng.randrange(2 ** 63))
        return mcts_act(game, state, config)


class PolicyAgent(Agent):
    def __init__(self, policy: Policy, temperature: float, label: str = "policy"):
        self.policy = policy
        self.temperature = temperature
        self.label = label

    def act(self, game, state, rng):
        return self.policy.sample_action(game, state, self.temperature, rng)


def make_agent(spec: str, policy: Policy | None = None,
               temperature: float = 0.7) -> Agent:
    """Build an agent from its spec string; policy agents need `policy`."""
    if spec == "random":
        return RandomAgent()
    if spec.startswith("mcts:"):
        return MctsAgent(int(spec.split(":", 1)[1]))
    if spec in ("policy", "self"):
        if policy is None:
            raise ValueError(f"agent spec {spec!r} needs an in-memory policy")
        return PolicyAgent(policy, temperature, label=spec)
    if spec.startswith("policy:"):
        return PolicyAgent(Policy.load(spec.split(":", 1)[1]), temperature, label=spec)
    raise ValueError(f"unknown agent spec {spec!r}")


def is_learner_spec(spec: str) -> bool:
    """True for seats controlled by the in-memory policy under training.

    Frozen checkpoints (``policy:<path>``) are opponents, not learners.
    """
    return spec in LEARNER_SPECS
