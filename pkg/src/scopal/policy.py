"""Compact linear-softmax policy over per-game feature blocks.

Logits are ``theta_game . phi(observation, action)``; the action
distribution at temperature tau is softmax(logits / tau) over the legal
actions in canonical order. Parameters start at zero (uniform policy).

Checkpoints are JSON with one block per game; Python float repr round-trips
exactly, so save -> load -> distribution is bit-identical.
"""
from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import feature_dim, features
from .games import Game, get_game

CHECKPOINT_FORMAT = "scopal-policy-v1"


@dataclass
class Policy:
    blocks: dict[str, np.ndarray] = field(default_factory=dict)
    version: int = 0

    def block(self, game: Game) -> np.ndarray:
        if game.name not in self.blocks:
            self.blocks[game.name] = np.zeros(feature_dim(game))
        return self.blocks[game.name]

    def clone(self) -> "Policy":
        return Policy({k: v.copy() for k, v in self.blocks.items()}, self.version)

    # -- distribution ---------------------------------------------------

    def logits(self, game: Game, state) -> tuple[tuple, np.ndarray, list[np.ndarray]]:
        """(legal actions, logit vector, feature vectors) in canonical order."""
        acts = game.legal_actions(state)
        theta = self.block(game)
        feats = [features(game, state, a) for a in acts]
        z = np.array([theta @ f for f in feats])
        return acts, z, feats

    def action_distribution(self, game: Game, state, temperature: float) -> tuple[tuple, np.ndarray]:
        """Probabilities over legal actions; requires a non-terminal state."""
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        acts, z, _ = self.logits(game, state)
        if not acts:
            raise ValueError("action_distribution: state is terminal")
        return acts, _softmax(z / temperature)

    def log_prob_and_grad(self, game: Game, state, action,
                          temperature: float = 1.0) -> tuple[float, np.ndarray]:
        """log pi(action|state; tau) and its gradient w.r.t. the game block."""
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        acts, z, feats = self.logits(game, state)
        try:
            idx = acts.index(action)
        except ValueError:
            raise ValueError(f"{game.name}: action {action!r} is illegal here") from None
        zs = z / temperature
        zs -= zs.max()
        expz = np.exp(zs)
        probs = expz / expz.sum()
        logp = float(zs[idx] - np.log(expz.sum()))
        mean_feat = np.zeros_like(feats[0])
        for p, f in zip(probs, feats):
            mean_feat += p * f
        grad = (feats[idx] - mean_feat) / temperature
        return logp, grad

    def log_prob(self, game: Game, state, action, temperature: float = 1.0) -> float:
        acts, z, _ = self.logits(game, state)
        idx = acts.index(action)
        zs = z / temperature
        zs -= zs.max()
        return float(zs[idx] - np.log(np.exp(zs).sum()))

    def sample_action(self, game: Game, state, temperature: float, rng: random.Random):
        acts, probs = self.action_distribution(game, state, temperature)
        r = rng.random()
        acc = 0.0
        for a, p in zip(acts, probs):
            acc += p
            if r < acc:
                return a
        return acts[-1]

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        data = {
            "format": CHECKPOINT_FORMAT,
            "version": self.version,
            "blocks": {name: list(map(float, vec)) for name, vec in sorted(self.blocks.items())},
        }
        Path(path).write_text(json.dumps(data, sort_keys=True, indent=0) + "\n")

    @classmethod
    def load(cls, path) -> "Policy":
        data = json.loads(Path(path).read_text())
        if data.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format in {path}")
        blocks = {name: np.array(vec, dtype=float) for name, vec in data["blocks"].items()}
        return cls(blocks, data["version"])


def new_policy(game_names) -> Policy:
    pol = Policy()
    for name in game_names:
        pol.block(get_game(name))
    return pol


def reference_copy(policy: Policy) -> Policy:
    """Frozen deep copy used as the KTO/DPO/SPAG reference."""
    return copy.deepcopy(policy)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()
