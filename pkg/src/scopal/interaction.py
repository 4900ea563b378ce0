"""Stage I: run episodes between two agents, alternate seats, record trajectories.

Episode i of a game derives all of its randomness from
``stable_hash(master_seed, game, i, ...)``, so a store is reproducible
byte-for-byte from (config, master seed) regardless of worker scheduling:
determinism is defined over the store sorted by (game, episode index).

The trajectory store is JSON lines, one trajectory per line, actions in the
canonical textual notation, named ``<run-id>.traj.jsonl``.
"""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .agents import Agent, make_agent
from .games import Game, IllegalActionError, Outcome, Player, get_game, tie_outcome
from .policy import Policy

DEFAULT_MOVE_BOUND = 200


def stable_hash(*parts) -> int:
    """Deterministic 63-bit hash of the stringified parts (not Python hash)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class Step:
    key: str
    actor: Player
    action: str  # canonical textual notation
    move_index: int


@dataclass
class Trajectory:
    game: str
    episode: int
    steps: list[Step]
    outcome: dict[Player, Outcome]
    first_player_agent: str
    chance_seed: int
    sampling_seed: int


def run_episode(game: Game, agent_p1: Agent, agent_p2: Agent, *, episode: int = 0,
                chance_seed: int = 0, sampling_seed: int = 0,
                move_bound: int = DEFAULT_MOVE_BOUND) -> Trajectory:
    """Play one episode to termination (or the safety move bound -> tie)."""
    agents = {Player.P1: agent_p1, Player.P2: agent_p2}
    rngs = {p: random.Random(stable_hash(sampling_seed, p.value)) for p in Player}
    state = game.initial_state(chance_seed)
    steps: list[Step] = []
    bound = min(move_bound, game.max_moves)
    outcome = game.outcome(state)
    while outcome is None and state.move_count < bound:
        actor = state.to_move
        action = agents[actor].act(game, state, rngs[actor])
        key = game.canonical_key(state, action)
        try:
            next_state = game.apply(state, action)
        except IllegalActionError as err:
            raise IllegalActionError(
                f"agent {agents[actor].label!r} returned an illegal action: {err}") from err
        steps.append(Step(key, actor, game.action_text(action), state.move_count))
        state = next_state
        outcome = game.outcome(state)
    if outcome is None:
        outcome = tie_outcome()
    return Trajectory(game.name, episode, steps, dict(outcome),
                      agent_p1.label, chance_seed, sampling_seed)


def _episode_seeds(master_seed: int, game_name: str, episode: int) -> tuple[int, int]:
    return (stable_hash(master_seed, game_name, episode, "chance"),
            stable_hash(master_seed, game_name, episode, "sample"))


def _run_range(game_name: str, agent1_spec: str, agent2_spec: str, episodes: Sequence[int],
               master_seed: int, blocks, version: int, temperature: float,
               move_bound: int) -> list[Trajectory]:
    policy = Policy(dict(blocks), version) if blocks is not None else None
    agent1 = make_agent(agent1_spec, policy, temperature)
    agent2 = make_agent(agent2_spec, policy, temperature)
    game = get_game(game_name)
    out = []
    for i in episodes:
        chance_seed, sampling_seed = _episode_seeds(master_seed, game_name, i)
        first, second = (agent1, agent2) if i % 2 == 0 else (agent2, agent1)
        out.append(run_episode(game, first, second, episode=i, chance_seed=chance_seed,
                               sampling_seed=sampling_seed, move_bound=move_bound))
    return out


def collect_trajectories(games: Iterable[str], agent1_spec: str, agent2_spec: str,
                         episodes: int, master_seed: int, *, policy: Policy | None = None,
                         temperature: float = 0.7, jobs: int = 1,
                         move_bound: int = DEFAULT_MOVE_BOUND) -> list[Trajectory]:
    """Run `episodes` per game with seats alternating every episode.

    Episode i seats agent1 first when i is even, so each agent is first
    player exactly episodes/2 times (up to rounding). Results are sorted by
    (game, episode) and independent of `jobs`.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    blocks = policy.blocks if policy is not None else None
    version = policy.version if policy is not None else 0
    game_names = list(games)
    trajectories: list[Trajectory] = []
    if jobs <= 1:
        for name in game_names:
            trajectories.extend(_run_range(name, agent1_spec, agent2_spec, range(episodes),
                                           master_seed, blocks, version, temperature, move_bound))
    else:
        tasks = []
        chunk = max(1, episodes // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for name in game_names:
                for start in range(0, episodes, chunk):
                    span = range(start, min(start + chunk, episodes))
                    tasks.append(pool.submit(_run_range, name, agent1_spec, agent2_spec,
                                             span, master_seed, blocks, version,
                                             temperature, move_bound))
            for task in tasks:
                trajectories.extend(task.result())
    trajectories.sort(key=lambda t: (t.game, t.episode))
    return trajectories


# -- store io ------------------------------------------------------------


def trajectory_record(traj: Trajectory) -> dict:
    return {
        "game": traj.game,
        "episode": traj.episode,
        "steps": [{"key": s.key, "actor": s.actor.value, "action": s.action,
                   "move_index": s.move_index} for s in traj.steps],
        "outcome": {p.value: traj.outcome[p].value for p in Player},
        "first_player_agent": traj.first_player_agent,
        "seeds": {"chance": traj.chance_seed, "sampling": traj.sampling_seed},
    }


def record_trajectory(data: dict) -> Trajectory:
    steps = [Step(s["key"], Player(s["actor"]), s["action"], s["move_index"])
             for s in data["steps"]]
    outcome = {Player(p): Outcome(v) for p, v in data["outcome"].items()}
    return Trajectory(data["game"], data["episode"], steps, outcome,
                      data["first_player_agent"], data["seeds"]["chance"],
                      data["seeds"]["sampling"])


def write_trajectories(path, trajectories: Iterable[Trajectory], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode) as fh:
        for traj in trajectories:
            fh.write(json.dumps(trajectory_record(traj), sort_keys=True) + "\n")


def read_trajectories(path) -> list[Trajectory]:
    out = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_trajectory(json.loads(line)))
            except (KeyError, ValueError) as err:
                raise ValueError(f"{path}:{line_no}: corrupt trajectory record: {err}") from err
    return out


def replay(traj: Trajectory):
    """Yield (state, action, actor) per step by re-simulating from the seeds.

    Raises if the recorded steps do not replay to the recorded outcome.
    """
    game = get_game(traj.game)
    state = game.initial_state(traj.chance_seed)
    for step in traj.steps:
        action = game.parse_action(step.action)
        if state.to_move is not step.actor:
            raise ValueError(f"replay mismatch: move {step.move_index} actor")
        yield state, action, step.actor
        state = game.apply(state, action)
    final = game.outcome(state)
    if final is None:
        final = tie_outcome()
    if dict(final) != dict(traj.outcome):
        raise ValueError(f"replay mismatch: outcome of {traj.game} episode {traj.episode}")
