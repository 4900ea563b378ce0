"""Stage III: strategy refinement.

Objectives over the labeled step dataset:

* behavioral cloning: mean negative log-likelihood of desirable steps;
* KTO: per-step desirability loss ``lambda_y - v`` with
  ``v = lambda_D * sigmoid(beta * (r - z0))`` for desirable steps and
  ``lambda_U * sigmoid(beta * (z0 - r))`` for undesirable ones, where
  ``r = log pi/pi_ref`` and ``z0`` is the batch-mean log ratio under a
  one-position cyclic mismatch of actions against states (detached from
  the gradient and clamped at >= 0);
* DPO: ``-log sigmoid(beta * (r(a+) - r(a-)))`` over desirable/undesirable
  pairs sharing a state key;
* the discounted self-play baseline: importance-weighted step advantages
  minus a KL penalty toward the data-generating snapshot.

Training is plain gradient descent with the configured epoch/batch/
accumulation structure; ``lambda_D n_D = lambda_U n_U`` with the larger
weight at 1.0 unless weights are given explicitly.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .games import Outcome, Player, get_game, split_key
from .interaction import Trajectory, replay, stable_hash
from .policy import Policy, reference_copy
from .rewards import DESIRABLE, LabeledStep, label_counts

METRIC_COLUMNS = ("stage", "epoch", "loss", "n_D", "n_U", "lambda_D", "lambda_U", "z0")


@dataclass
class TrainConfig:
    learning_rate: float = 1e-2  # scale-appropriate for the compact policy
    batch_size: int = 2
    grad_accum: int = 8  # applied in the KTO stage
    epochs: int = 5
    beta: float = 0.1
    beta2: float = 0.2
    lambda_d: float | None = None  # None -> auto-balance from label counts
    lambda_u: float | None = None
    delta: float = 0.5
    seed: int = 0
    mode: str = "two_stage"  # two_stage | direct_kto | joint | bc_only | bc_dpo
    dpo_pair_cap: int = 4


@dataclass
class LossReport:
    loss: float
    gradient: dict[str, np.ndarray]
    n_desirable: int = 0
    n_undesirable: int = 0
    z0: float | None = None


def balance_lambdas(n_d: int, n_u: int) -> tuple[float, float]:
    """Weights with lambda_D*n_D == lambda_U*n_U and the larger one at 1.0."""
    if n_d == 0 or n_u == 0:
        return 1.0, 1.0
    if n_d <= n_u:
        return 1.0, n_d / n_u
    return n_u / n_d, 1.0


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _accumulate(grads: dict[str, np.ndarray], name: str, vec: np.ndarray, scale: float) -> None:
    if name in grads:
        grads[name] += scale * vec
    else:
        grads[name] = scale * vec


def bc_loss(policy: Policy, batch: Sequence[LabeledStep]) -> LossReport:
    """Mean negative log-likelihood of the batch actions at temperature 1."""
    if not batch:
        raise ValueError("bc_loss: empty batch")
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    inv = 1.0 / len(batch)
    for step in batch:
        game = get_game(step.game)
        logp, grad = policy.log_prob_and_grad(game, step.state, step.action)
        total -= logp
        _accumulate(grads, step.game, grad, -inv)
    return LossReport(total * inv, grads, n_desirable=len(batch))


def kto_mismatch_z0(policy: Policy, reference: Policy, batch: Sequence[LabeledStep]) -> float:
    """Batch z0 estimate: mean log ratio over cyclically mismatched pairs.

    The batch is sorted internally, so the estimate is invariant to input
    permutation. Mismatched actions that are illegal in the paired state
    (possible here, unlike with free-text outputs) are skipped.
    """
    items = sorted(batch, key=lambda s: (s.game, s.key))
    ratios = []
    for i, step in enumerate(items):
        other = items[i - 1]
        if other.game != step.game:
            continue
        game = get_game(step.game)
        if other.action not in game.legal_actions(step.state):
            continue
        r = (policy.log_prob(game, step.state, other.action)
             - reference.log_prob(game, step.state, other.action))
        ratios.append(r)
    if not ratios:
        return 0.0
    return max(0.0, sum(ratios) / len(ratios))


def kto_loss(policy: Policy, reference: Policy, batch: Sequence[LabeledStep], *,
             beta: float, lambda_d: float = 1.0, lambda_u: float = 1.0,
             z0_override: float | None = None) -> LossReport:
    """Mean of lambda_y - v(x, y) over the batch, with analytic gradient.

    ``z0_override`` freezes the baseline (used by finite-difference checks;
    z0 is detached from the gradient either way).
    """
    if not batch:
        raise ValueError("kto_loss: empty batch")
    if beta <= 0:
        raise ValueError("kto_loss: beta must be positive")
    z0 = kto_mismatch_z0(policy, reference, batch) if z0_override is None else z0_override
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    n_d = n_u = 0
    inv = 1.0 / len(batch)
    for step in batch:
        game = get_game(step.game)
        logp, grad = policy.log_prob_and_grad(game, step.state, step.action)
        ref_logp = reference.log_prob(game, step.state, step.action)
        if not math.isfinite(ref_logp):
            raise ValueError(f"reference assigns zero probability to {step.key!r}")
        r = logp - ref_logp
        if step.label == DESIRABLE:
            n_d += 1
            s = _sigmoid(beta * (r - z0))
            total += lambda_d * (1.0 - s)
            _accumulate(grads, step.game, grad, -inv * lambda_d * beta * s * (1.0 - s))
        else:
            n_u += 1
            s = _sigmoid(beta * (z0 - r))
            total += lambda_u * (1.0 - s)
            _accumulate(grads, step.game, grad, inv * lambda_u * beta * s * (1.0 - s))
    return LossReport(total * inv, grads, n_d, n_u, z0)


def build_dpo_pairs(dataset: Sequence[LabeledStep],
                    cap: int = 4) -> list[tuple[LabeledStep, LabeledStep]]:
    """Cross desirable x undesirable steps sharing a state key, capped per state."""
    by_state: dict[str, tuple[list[LabeledStep], list[LabeledStep]]] = {}
    for step in dataset:
        state_key, _ = split_key(step.key)
        pos, neg = by_state.setdefault(state_key, ([], []))
        (pos if step.label == DESIRABLE else neg).append(step)
    pairs = []
    for state_key in sorted(by_state):
        pos, neg = by_state[state_key]
        if not pos or not neg:
            continue
        pos.sort(key=lambda s: (-s.reward, s.key))
        neg.sort(key=lambda s: (s.reward, s.key))
        n = 0
        for p in pos:
            for q in neg:
                pairs.append((p, q))
                n += 1
                if n >= cap:
                    break
            if n >= cap:
                break
    return pairs


def dpo_loss(policy: Policy, reference: Policy,
             pairs: Sequence[tuple[LabeledStep, LabeledStep]], beta: float) -> LossReport:
    """Mean -log sigmoid(beta * (log-ratio(a+) - log-ratio(a-)))."""
    if not pairs:
        raise ValueError("dpo_loss: no constructible pairs")
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    inv = 1.0 / len(pairs)
    for pos, neg in pairs:
        game = get_game(pos.game)
        lp_pos, g_pos = policy.log_prob_and_grad(game, pos.state, pos.action)
        lp_neg, g_neg = policy.log_prob_and_grad(game, neg.state, neg.action)
        h = (lp_pos - reference.log_prob(game, pos.state, pos.action)
             - lp_neg + reference.log_prob(game, neg.state, neg.action))
        total += -_log_sigmoid(beta * h)
        scale = -inv * beta * _sigmoid(-beta * h)
        _accumulate(grads, pos.game, g_pos, scale)
        _accumulate(grads, neg.game, g_neg, -scale)
    return LossReport(total * inv, grads,
                      n_desirable=len(pairs), n_undesirable=len(pairs))


def _log_sigmoid(x: float) -> float:
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


# -- discounted self-play baseline ----------------------------------------


def spag_assign_rewards(traj: Trajectory, gamma: float = 0.8) -> list[float]:
    """Signed discounted reward per recorded step.

    For an actor with T own steps, their t-th step (1-based) carries
    ``(1-gamma) * gamma^(T-t) / (1 - gamma^(T+1))``, positive for the
    winner, negated for the loser, zero on ties.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    totals = {p: sum(1 for s in traj.steps if s.actor is p) for p in Player}
    index = {p: 0 for p in Player}
    rewards = []
    for step in traj.steps:
        index[step.actor] += 1
        t, horizon = index[step.actor], totals[step.actor]
        outcome = traj.outcome[step.actor]
        if outcome is Outcome.TIE:
            rewards.append(0.0)
            continue
        magnitude = (1 - gamma) * gamma ** (horizon - t) / (1 - gamma ** (horizon + 1))
        rewards.append(magnitude if outcome is Outcome.WIN else -magnitude)
    return rewards


@dataclass(frozen=True)
class AdvantageStep:
    game: str
    state: object
    action: object
    actor: Player
    advantage: float


def build_advantage_steps(trajectories: Iterable[Trajectory],
                          agent_pair: tuple[str, str] = ("policy", "self"),
                          gamma: float = 0.8) -> list[AdvantageStep]:
    """Per-occurrence rewarded steps for the discounted baseline.

    Only learner seats contribute: the importance ratio is meaningful only
    for actions the behavior snapshot actually generated (both seats under
    self-play).
    """
    from .agents import is_learner_spec

    out = []
    for traj in trajectories:
        first = traj.first_player_agent
        second = agent_pair[1] if first == agent_pair[0] else agent_pair[0]
        labels = {Player.P1: first, Player.P2: second}
        rewards = spag_assign_rewards(traj, gamma)
        for (state, action, actor), adv in zip(replay(traj), rewards):
            if is_learner_spec(labels[actor]):
                out.append(AdvantageStep(traj.game, state, action, actor, adv))
    return out


def spag_loss(policy: Policy, reference: Policy, steps: Sequence[AdvantageStep],
              beta2: float) -> LossReport:
    """Negated seat-averaged mean of ratio*advantage - beta2*KL(pi||pi_ref)."""
    if not steps:
        raise ValueError("spag_loss: no steps")
    seat_terms: dict[Player, list[float]] = {Player.P1: [], Player.P2: []}
    seat_grads: dict[Player, dict[str, np.ndarray]] = {Player.P1: {}, Player.P2: {}}
    for step in steps:
        game = get_game(step.game)
        acts, z, feats = policy.logits(game, step.state)
        z = z - z.max()
        expz = np.exp(z)
        probs = expz / expz.sum()
        logps = z - math.log(expz.sum())
        idx = acts.index(step.action)
        _, ref_z, _ = reference.logits(game, step.state)
        ref_z = ref_z - ref_z.max()
        ref_logps = ref_z - math.log(np.exp(ref_z).sum())
        if not np.isfinite(ref_logps[idx]):
            raise ValueError(f"behavior policy assigns zero probability in {step.game}")
        mean_feat = np.zeros_like(feats[0])
        for p, f in zip(probs, feats):
            mean_feat += p * f
        ratio = math.exp(logps[idx] - ref_logps[idx])
        kl = float(np.dot(probs, logps - ref_logps))
        seat_terms[step.actor].append(ratio * step.advantage - beta2 * kl)
        grad = ratio * step.advantage * (feats[idx] - mean_feat)
        for p, f, lp, rlp in zip(probs, feats, logps, ref_logps):
            grad -= beta2 * p * (lp - rlp) * (f - mean_feat)
        _accumulate(seat_grads[step.actor], step.game, grad, 1.0)
    seats = [p for p in Player if seat_terms[p]]
    weight = 1.0 / len(seats)
    loss = 0.0
    grads: dict[str, np.ndarray] = {}
    for p in seats:
        n = len(seat_terms[p])
        loss -= weight * sum(seat_terms[p]) / n
        for name, vec in seat_grads[p].items():
            _accumulate(grads, name, vec, -weight / n)
    return LossReport(loss, grads)


# -- dataset balancing and scaling -----------------------------------------


def _resample(items: list[LabeledStep], target: int, rng: random.Random) -> list[LabeledStep]:
    """Keep all originals when upsampling; seeded sample when downsampling."""
    if target == len(items):
        return list(items)
    if target < len(items):
        return [items[i] for i in sorted(rng.sample(range(len(items)), target))]
    extra = [items[rng.randrange(len(items))] for _ in range(target - len(items))]
    return list(items) + extra


def balance_by_game(dataset: Sequence[LabeledStep], seed: int = 0) -> list[LabeledStep]:
    """Equalize per-game counts to total/|games| (+-1), total preserved."""
    if not dataset:
        return []
    by_game: dict[str, list[LabeledStep]] = {}
    for step in dataset:
        by_game.setdefault(step.game, []).append(step)
    names = sorted(by_game)
    total = len(dataset)
    base, remainder = divmod(total, len(names))
    out: list[LabeledStep] = []
    for i, name in enumerate(names):
        target = base + (1 if i < remainder else 0)
        items = sorted(by_game[name], key=lambda s: s.key)
        rng = random.Random(stable_hash(seed, "balance", name))
        out.extend(_resample(items, target, rng))
    out.sort(key=lambda s: (s.game, s.key))
    return out


def scale_dataset(dataset: Sequence[LabeledStep], *, target_total: int | None = None,
                  target_desirable: int | None = None, target_undesirable: int | None = None,
                  seed: int = 0) -> list[LabeledStep]:
    """Upsample by class.

    With ``target_total`` the desirable:undesirable ratio is preserved at the
    new total; with explicit class targets both are hit exactly. Targets must
    not fall below current counts (this is an upsampler).
    """
    pos = sorted((s for s in dataset if s.label == DESIRABLE), key=lambda s: (s.game, s.key))
    neg = sorted((s for s in dataset if s.label != DESIRABLE), key=lambda s: (s.game, s.key))
    n_d, n_u = len(pos), len(neg)
    if target_total is not None:
        if target_desirable is not None or target_undesirable is not None:
            raise ValueError("give either target_total or per-class targets, not both")
        if target_total < n_d + n_u:
            raise ValueError("target_total below current dataset size")
        target_desirable = round(target_total * n_d / (n_d + n_u))
        target_undesirable = target_total - target_desirable
    if target_desirable is None or target_undesirable is None:
        raise ValueError("scaling needs target_total or both class targets")
    if target_desirable < n_d or target_undesirable < n_u:
        raise ValueError("class target below current count")
    out = _resample(pos, target_desirable, random.Random(stable_hash(seed, "scale", "D")))
    out += _resample(neg, target_undesirable, random.Random(stable_hash(seed, "scale", "U")))
    out.sort(key=lambda s: (s.game, s.key))
    return out


# -- training loops ---------------------------------------------------------


def _apply_gradient(policy: Policy, grads: Mapping[str, np.ndarray], lr: float) -> None:
    for name, vec in grads.items():
        block = policy.block(get_game(name))
        block -= lr * vec


def _batches(items: list, size: int, rng: random.Random):
    order = list(items)
    rng.shuffle(order)
    for i in range(0, len(order), size):
        yield order[i:i + size]


def _metric_row(stage: str, epoch: int, loss: float, n_d: int, n_u: int,
                lam_d: float, lam_u: float, z0) -> dict:
    return {"stage": stage, "epoch": epoch, "loss": loss, "n_D": n_d, "n_U": n_u,
            "lambda_D": lam_d, "lambda_U": lam_u, "z0": z0}


def _guard(loss: float, stage: str) -> None:
    if not math.isfinite(loss):
        raise RuntimeError(f"training diverged during {stage}: loss is not finite")


def train_bc(policy: Policy, steps: Sequence[LabeledStep], config: TrainConfig,
             metrics: list[dict], stage: str = "bc") -> None:
    desirable = [s for s in steps if s.label == DESIRABLE]
    if not desirable:
        return
    for epoch in range(config.epochs):
        rng = random.Random(stable_hash(config.seed, stage, epoch))
        losses = []
        for batch in _batches(desirable, config.batch_size, rng):
            report = bc_loss(policy, batch)
            _guard(report.loss, stage)
            _apply_gradient(policy, report.gradient, config.learning_rate)
            losses.append(report.loss)
        metrics.append(_metric_row(stage, epoch, sum(losses) / len(losses),
                                   len(desirable), 0, 1.0, 0.0, ""))
    policy.version += 1


def train_kto(policy: Policy, reference: Policy, dataset: Sequence[LabeledStep],
              config: TrainConfig, metrics: list[dict], stage: str = "kto") -> None:
    if not dataset:
        return
    n_d, n_u = label_counts(dataset)
    lam_d, lam_u = _lambdas(config, n_d, n_u)
    for epoch in range(config.epochs):
        rng = random.Random(stable_hash(config.seed, stage, epoch))
        losses, z0s = [], []
        accum: dict[str, np.ndarray] = {}
        pending = 0
        for batch in _batches(list(dataset), config.batch_size, rng):
            report = kto_loss(policy, reference, batch, beta=config.beta,
                              lambda_d=lam_d, lambda_u=lam_u)
            _guard(report.loss, stage)
            for name, vec in report.gradient.items():
                _accumulate(accum, name, vec, 1.0 / config.grad_accum)
            pending += 1
            if pending == config.grad_accum:
                _apply_gradient(policy, accum, config.learning_rate)
                accum, pending = {}, 0
            losses.append(report.loss)
            z0s.append(report.z0)
        if pending:
            _apply_gradient(policy, {k: v * (config.grad_accum / pending)
                                     for k, v in accum.items()}, config.learning_rate)
        metrics.append(_metric_row(stage, epoch, sum(losses) / len(losses),
                                   n_d, n_u, lam_d, lam_u, sum(z0s) / len(z0s)))
    policy.version += 1


def train_dpo(policy: Policy, reference: Policy, dataset: Sequence[LabeledStep],
              config: TrainConfig, metrics: list[dict], stage: str = "dpo") -> None:
    pairs = build_dpo_pairs(dataset, config.dpo_pair_cap)
    if not pairs:
        return
    for epoch in range(config.epochs):
        rng = random.Random(stable_hash(config.seed, stage, epoch))
        losses = []
        for batch in _batches(pairs, config.batch_size, rng):
            report = dpo_loss(policy, reference, batch, config.beta)
            _guard(report.loss, stage)
            _apply_gradient(policy, report.gradient, config.learning_rate)
            losses.append(report.loss)
        metrics.append(_metric_row(stage, epoch, sum(losses) / len(losses),
                                   len(pairs), len(pairs), 1.0, 1.0, ""))
    policy.version += 1


def train_spag(policy: Policy, steps: Sequence[AdvantageStep], config: TrainConfig,
               metrics: list[dict], stage: str = "spag") -> None:
    if not steps:
        return
    reference = reference_copy(policy)
    for epoch in range(config.epochs):
        rng = random.Random(stable_hash(config.seed, stage, epoch))
        losses = []
        for batch in _batches(list(steps), config.batch_size, rng):
            report = spag_loss(policy, reference, batch, config.beta2)
            _guard(report.loss, stage)
            _apply_gradient(policy, report.gradient, config.learning_rate)
            losses.append(report.loss)
        metrics.append(_metric_row(stage, epoch, sum(losses) / len(losses),
                                   len(steps), 0, 1.0, 0.0, ""))
    policy.version += 1


def _lambdas(config: TrainConfig, n_d: int, n_u: int) -> tuple[float, float]:
    if config.lambda_d is not None and config.lambda_u is not None:
        return config.lambda_d, config.lambda_u
    return balance_lambdas(n_d, n_u)


def _train_joint(policy: Policy, dataset: Sequence[LabeledStep], config: TrainConfig,
                 metrics: list[dict]) -> None:
    reference = reference_copy(policy)
    n_d, n_u = label_counts(dataset)
    lam_d, lam_u = _lambdas(config, n_d, n_u)
    for epoch in range(config.epochs):
        rng = random.Random(stable_hash(config.seed, "joint", epoch))
        losses, z0s = [], []
        for batch in _batches(list(dataset), config.batch_size, rng):
            report = kto_loss(policy, reference, batch, beta=config.beta,
                              lambda_d=lam_d, lambda_u=lam_u)
            grads = dict(report.gradient)
            loss = report.loss
            desirable = [s for s in batch if s.label == DESIRABLE]
            if desirable:
                bc = bc_loss(policy, desirable)
                loss += bc.loss
                for name, vec in bc.gradient.items():
                    _accumulate(grads, name, vec, 1.0)
            _guard(loss, "joint")
            _apply_gradient(policy, grads, config.learning_rate)
            losses.append(loss)
            z0s.append(report.z0)
        metrics.append(_metric_row("joint", epoch, sum(losses) / len(losses),
                                   n_d, n_u, lam_d, lam_u, sum(z0s) / len(z0s)))
    policy.version += 1


def train_two_stage(policy: Policy, dataset: Sequence[LabeledStep],
                    config: TrainConfig) -> tuple[Policy, list[dict]]:
    """Train a copy of `policy` on the labeled dataset; returns (policy, metrics).

    Modes: two_stage (BC on desirable steps, then KTO against the post-BC
    snapshot), direct_kto, joint (summed objectives), bc_only, bc_dpo.
    """
    trained = policy.clone()
    metrics: list[dict] = []
    mode = config.mode
    if mode == "two_stage":
        train_bc(trained, dataset, config, metrics)
        reference = reference_copy(trained)
        train_kto(trained, reference, dataset, config, metrics)
    elif mode == "direct_kto":
        reference = reference_copy(trained)
        train_kto(trained, reference, dataset, config, metrics)
    elif mode == "joint":
        _train_joint(trained, dataset, config, metrics)
    elif mode == "bc_only":
        train_bc(trained, dataset, config, metrics)
    elif mode == "bc_dpo":
        train_bc(trained, dataset, config, metrics)
        reference = reference_copy(trained)
        train_dpo(trained, reference, dataset, config, metrics)
    else:
        raise ValueError(f"unknown training mode {mode!r}")
    return trained, metrics


def write_metrics_csv(path, rows: Iterable[dict]) -> None:
    lines = [",".join(METRIC_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in METRIC_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
