"""Win-rate metric, tournaments, head-to-head matrices, opponent sweep,
iterated training, and exact-solver regret.

Every report derives its per-episode seeds the same way interaction does,
so reports are reproducible byte-for-byte from (config, master seed).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .agents import Agent, make_agent
from .games import Outcome, Player, get_game
from .interaction import (DEFAULT_MOVE_BOUND, collect_trajectories, run_episode,
                          stable_hash)
from .policy import Policy
from .refine import TrainConfig, train_two_stage
from .rewards import (collect_representatives, estimate_rewards, label_counts,
                      label_steps)
from .solvers import get_solver

TOURNAMENT_COLUMNS = ("game", "agent1", "agent2", "n_win", "n_lose", "n_tie",
                      "win_rate", "episodes", "seed")
HEAD2HEAD_COLUMNS = ("row_agent", "col_agent", "win_rate")
SWEEP_COLUMNS = ("opponent", "interaction_win_rate", "n_desirable", "n_undesirable",
                 "desirable_fraction", "trained_win_rate")
REGRET_COLUMNS = ("game", "agent", "mean_regret", "moves", "episodes")


def win_rate(n_win: int, n_lose: int, n_tie: int) -> float:
    """(N_win + 0.5 N_tie) / (N_win + N_lose + N_tie)."""
    total = n_win + n_lose + n_tie
    if total < 1:
        raise ValueError("win_rate: no outcomes counted")
    return (n_win + 0.5 * n_tie) / total


@dataclass
class MatchReport:
    game: str
    agent1: str
    agent2: str
    n_win: int  # from agent1's perspective
    n_lose: int
    n_tie: int
    win_rate: float
    episodes: int
    seed: int


@dataclass
class RegretReport:
    game: str
    agent: str
    mean_regret: float
    moves: int
    episodes: int


def play_match(game_name: str, agent1: Agent, agent2: Agent, episodes: int,
               master_seed: int, *, move_bound: int = DEFAULT_MOVE_BOUND) -> MatchReport:
    """Seat-alternated match; outcome counts from agent1's perspective."""
    if episodes < 2:
        raise ValueError("matches need at least 2 episodes for seat alternation")
    game = get_game(game_name)
    n_win = n_lose = n_tie = 0
    for i in range(episodes):
        chance = stable_hash(master_seed, game_name, i, "chance")
        sampling = stable_hash(master_seed, game_name, i, "sample")
        first, second = (agent1, agent2) if i % 2 == 0 else (agent2, agent1)
        traj = run_episode(game, first, second, episode=i, chance_seed=chance,
                           sampling_seed=sampling, move_bound=move_bound)
        seat = Player.P1 if i % 2 == 0 else Player.P2
        outcome = traj.outcome[seat]
        if outcome is Outcome.WIN:
            n_win += 1
        elif outcome is Outcome.LOSE:
            n_lose += 1
        else:
            n_tie += 1
    return MatchReport(game_name, agent1.label, agent2.label, n_win, n_lose, n_tie,
                       win_rate(n_win, n_lose, n_tie), episodes, master_seed)


def tournament(agent: Agent, opponent_specs: Sequence[str], games: Sequence[str],
               episodes: int, master_seed: int, *,
               eval_temperature: float = 0.2) -> list[MatchReport]:
    """One report per (game, opponent); policy-file opponents use eval temperature."""
    reports = []
    for game_name in games:
        for spec in opponent_specs:
            opponent = make_agent(spec, temperature=eval_temperature)
            seed = stable_hash(master_seed, "tournament", game_name, spec)
            reports.append(play_match(game_name, agent, opponent, episodes, seed))
    return reports


def average_win_rate(reports: Iterable[MatchReport]) -> float:
    reports = list(reports)
    return sum(r.win_rate for r in reports) / len(reports)


def head_to_head(agents: Sequence[tuple[str, Agent]], games: Sequence[str],
                 episodes: int, master_seed: int) -> list[list[float]]:
    """Pairwise average win-rate matrix; diagonal fixed at 0.5 by convention.

    M[i][j] + M[j][i] = 1 exactly: each unordered pair plays one match set.
    """
    n = len(agents)
    matrix = [[0.5] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rates = []
            for game_name in games:
                seed = stable_hash(master_seed, "h2h", game_name, agents[i][0], agents[j][0])
                report = play_match(game_name, agents[i][1], agents[j][1], episodes, seed)
                rates.append(report.win_rate)
            avg = sum(rates) / len(rates)
            matrix[i][j] = avg
            matrix[j][i] = 1.0 - avg
    return matrix


def interaction_stats(trajectories, agent_pair: tuple[str, str], *,
                      estimator_kwargs: dict | None = None,
                      delta: float = 0.5, actors: str = "learner"):
    """Labeled dataset + the learner's interaction win rate over a store."""
    from .agents import is_learner_spec

    n_win = n_lose = n_tie = 0
    for traj in trajectories:
        labels = {Player.P1: traj.first_player_agent,
                  Player.P2: agent_pair[1] if traj.first_player_agent == agent_pair[0]
                  else agent_pair[0]}
        seat = Player.P1 if is_learner_spec(labels[Player.P1]) else Player.P2
        outcome = traj.outcome[seat]
        if outcome is Outcome.WIN:
            n_win += 1
        elif outcome is Outcome.LOSE:
            n_lose += 1
        else:
            n_tie += 1
    kwargs = dict(estimator_kwargs or {})
    rewards = estimate_rewards(trajectories, **kwargs)
    reps = collect_representatives(trajectories, agent_pair, actors=actors)
    dataset = label_steps(rewards, delta, reps)
    return dataset, win_rate(n_win, n_lose, n_tie)


def opponent_sweep(base_policy: Policy, ladder: Sequence[str], games: Sequence[str],
                   interact_episodes: int, eval_opponents: Sequence[str],
                   eval_episodes: int, train_config: TrainConfig, master_seed: int, *,
                   interact_temperature: float = 0.7, eval_temperature: float = 0.2,
                   delta: float = 0.5, jobs: int = 1) -> list[dict]:
    """Interact/train/evaluate once per ladder rung; one summary row each."""
    if not ladder:
        raise ValueError("opponent_sweep: empty ladder")
    rows = []
    for rung in ladder:
        seed = stable_hash(master_seed, "sweep", rung)
        trajs = collect_trajectories(games, "policy", rung, interact_episodes, seed,
                                     policy=base_policy, temperature=interact_temperature,
                                     jobs=jobs)
        dataset, interact_wr = interaction_stats(trajs, ("policy", rung), delta=delta)
        n_d, n_u = label_counts(dataset)
        trained, _ = train_two_stage(base_policy, dataset,
                                     replace(train_config, seed=seed))
        from .agents import PolicyAgent
        agent = PolicyAgent(trained, eval_temperature, label=f"trained-vs-{rung}")
        reports = tournament(agent, eval_opponents, games, eval_episodes, seed,
                             eval_temperature=eval_temperature)
        rows.append({
            "opponent": rung,
            "interaction_win_rate": interact_wr,
            "n_desirable": n_d,
            "n_undesirable": n_u,
            "desirable_fraction": n_d / max(1, n_d + n_u),
            "trained_win_rate": average_win_rate(reports),
        })
    return rows


def iterate(policy: Policy, rounds: int, games: Sequence[str], episodes: int,
            train_config: TrainConfig, master_seed: int, out_dir, *,
            eval_opponents: Sequence[str] = ("random", "mcts:1000"),
            eval_episodes: int = 100, interact_temperature: float = 0.7,
            eval_temperature: float = 0.2, delta: float = 0.5,
            jobs: int = 1) -> tuple[list[Path], list[dict]]:
    """Round 1 is self-play; round k >= 2 plays current vs previous checkpoint.

    Returns checkpoint paths (version strictly increasing) and per-round
    evaluation rows. Later rounds may decline; that is reported, not asserted.
    """
    if rounds < 1:
        raise ValueError("iterate: rounds must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    current = policy
    checkpoints: list[Path] = []
    reports: list[dict] = []
    prev_path: Path | None = None
    for round_no in range(1, rounds + 1):
        opponent = "self" if prev_path is None else f"policy:{prev_path}"
        seed = stable_hash(master_seed, "iterate", round_no)
        trajs = collect_trajectories(games, "policy", opponent, episodes, seed,
                                     policy=current, temperature=interact_temperature,
                                     jobs=jobs)
        dataset, interact_wr = interaction_stats(trajs, ("policy", opponent), delta=delta)
        current, _ = train_two_stage(current, dataset, replace(train_config, seed=seed))
        path = out_dir / f"checkpoint_round{round_no}.json"
        current.save(path)
        checkpoints.append(path)
        from .agents import PolicyAgent
        agent = PolicyAgent(current, eval_temperature, label=f"iter{round_no}")
        evals = tournament(agent, eval_opponents, games, eval_episodes, seed,
                           eval_temperature=eval_temperature)
        reports.append({"round": round_no, "opponent": opponent,
                        "interaction_win_rate": interact_wr,
                        "eval_win_rate": average_win_rate(evals),
                        "version": current.version})
        prev_path = path
    return checkpoints, reports


def regret(agent: Agent, game_name: str, episodes: int, master_seed: int, *,
           opponent_spec: str = "mcts:1000") -> RegretReport:
    """Mean exact-minimax value loss per agent move vs the ladder opponent."""
    solver = get_solver(game_name)
    game = get_game(game_name)
    opponent = make_agent(opponent_spec)
    total = 0.0
    moves = 0
    for i in range(episodes):
        chance = stable_hash(master_seed, "regret", game_name, i, "chance")
        rng_a = random.Random(stable_hash(master_seed, "regret", game_name, i, "a"))
        rng_o = random.Random(stable_hash(master_seed, "regret", game_name, i, "o"))
        seat = Player.P1 if i % 2 == 0 else Player.P2
        state = game.initial_state(chance)
        while game.outcome(state) is None:
            if state.to_move is seat:
                action = agent.act(game, state, rng_a)
                total += solver.regret(state, action)
                moves += 1
            else:
                action = opponent.act(game, state, rng_o)
            state = game.apply(state, action)
    return RegretReport(game_name, agent.label, total / max(1, moves), moves, episodes)


# -- CSV writers -------------------------------------------------------------


def _write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_tournament_csv(path, reports: Iterable[MatchReport]) -> None:
    _write_csv(path, TOURNAMENT_COLUMNS,
               [(r.game, r.agent1, r.agent2, r.n_win, r.n_lose, r.n_tie,
                 r.win_rate, r.episodes, r.seed) for r in reports])


def write_head2head_csv(path, labels: Sequence[str], matrix: Sequence[Sequence[float]]) -> None:
    rows = []
    for i, row_label in enumerate(labels):
        for j, col_label in enumerate(labels):
            rows.append((row_label, col_label, matrix[i][j]))
    _write_csv(path, HEAD2HEAD_COLUMNS, rows)


def write_sweep_csv(path, rows: Iterable[dict]) -> None:
    _write_csv(path, SWEEP_COLUMNS, [tuple(r[c] for c in SWEEP_COLUMNS) for r in rows])


def write_regret_csv(path, reports: Iterable[RegretReport]) -> None:
    _write_csv(path, REGRET_COLUMNS,
               [(r.game, r.agent, r.mean_regret, r.moves, r.episodes) for r in reports])
