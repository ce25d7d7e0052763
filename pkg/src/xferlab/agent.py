"""Policy/value network, n-step returns, synchronous A2C, and fine-tune settings."""

from __future__ import annotations

import copy
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError, NumericalFailureError
from .envs import EnvConfig, FrameHistory, make_env
from .metrics import MetricsRecord
from .numerics import apply_init, check_finite, freeze_, make_optimizer

CONV_LAYERS = ("conv1", "conv2", "conv3")
OUTPUT_LAYERS = ("pi", "v")
FINETUNE_SETTINGS = (
    "from-scratch", "full-ft", "random-output", "partial-ft", "partial-random-ft",
)


class PolicyNet(nn.Module):
    """3 conv layers, a dense trunk, and separate policy/value heads."""

    def __init__(self, n_actions: int, stack: int = 4):
        super().__init__()
        self.n_actions = n_actions
        self.stack = stack
        self.conv1 = nn.Conv2d(stack, 16, 8, stride=4)
        self.conv2 = nn.Conv2d(16, 32, 4, stride=2)
        self.conv3 = nn.Conv2d(32, 32, 3, stride=1)
        self.fc = nn.Linear(32 * 7 * 7, 256)
        self.pi = nn.Linear(256, n_actions)
        self.v = nn.Linear(256, 1)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = F.relu(self.conv1(x))
        h = F.relu(self.conv2(h))
        h = F.relu(self.conv3(h))
        h = F.relu(self.fc(h.flatten(1)))
        return self.pi(h), self.v(h).squeeze(-1)


def build_policy(n_actions: int, init: str = "orthogonal", seed: int = 0,
                 stack: int = 4) -> PolicyNet:
    net = PolicyNet(n_actions, stack=stack)
    apply_init(net, init, seed)
    return net


def policy_output(net: PolicyNet, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Action probabilities and state values for a batch of observations."""
    logits, values = net(obs)
    probs = F.softmax(logits, dim=-1)
    check_finite(probs, "action probabilities")
    return probs, values


def act(net: PolicyNet, obs: np.ndarray | torch.Tensor, mode: str = "deterministic",
        generator: torch.Generator | None = None):
    """Pick an action for a single observation.

    Deterministic mode returns the argmax-probability action (ties break to
    the lowest index); stochastic mode samples from the policy.
    Returns (action, (probs, value)).
    """
    obs_t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
    with torch.no_grad():
        probs, values = policy_output(net, obs_t)
    actions = select_actions(probs, mode, generator)
    return int(actions[0]), (probs[0].numpy(), float(values[0]))


def select_actions(probs: torch.Tensor, mode: str,
                   generator: torch.Generator | None = None) -> torch.Tensor:
    if mode == "deterministic":
        return probs.argmax(dim=-1)  # argmax picks the first maximum on ties
    if mode == "stochastic":
        return torch.multinomial(probs, 1, generator=generator).squeeze(-1)
    raise ValueError(f"unknown action mode: {mode!r}")


def nstep_returns(rewards: torch.Tensor, dones: torch.Tensor,
                  bootstrap: torch.Tensor, gamma: float) -> torch.Tensor:
    """n-step bootstrapped targets over a (workers, n) rollout.

    A terminal flag zeroes the bootstrap and stops reward accumulation from
    leaking across the episode boundary.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    rewards = torch.as_tensor(rewards)
    if not rewards.is_floating_point():
        rewards = rewards.float()
    dones = torch.as_tensor(dones, dtype=torch.bool)
    running = torch.as_tensor(bootstrap, dtype=rewards.dtype).clone()
    out = torch.empty_like(rewards)
    for t in range(rewards.shape[1] - 1, -1, -1):
        running = torch.where(dones[:, t], torch.zeros_like(running), running)
        running = rewards[:, t] + gamma * running
        out[:, t] = running
    return out


def a2c_losses(net: PolicyNet, obs: torch.Tensor, actions: torch.Tensor,
               targets: torch.Tensor, entropy_weight: float = 0.01,
               value_weight: float = 0.5) -> dict[str, torch.Tensor]:
    """Actor-critic loss terms; the advantage is a constant in the policy term."""
    logits, values = net(obs)
    log_probs = F.log_softmax(logits, dim=-1)
    probs = log_probs.exp()
    logp_a = log_probs.gather(1, actions.view(-1, 1)).squeeze(1)
    advantage = (targets - values).detach()
    entropy = -(probs * log_probs).sum(dim=-1)
    policy_loss = -(logp_a * advantage).mean() - entropy_weight * entropy.mean()
    value_loss = value_weight * ((targets - values) ** 2).mean()
    total = policy_loss + value_loss
    check_finite(total, "a2c loss")
    return {
        "total": total,
        "policy": policy_loss,
        "value": value_loss,
        "entropy": entropy.mean(),
    }


def a2c_update(net: PolicyNet, optimizer: torch.optim.Optimizer,
               obs: torch.Tensor, actions: torch.Tensor, targets: torch.Tensor,
               entropy_weight: float = 0.01, value_weight: float = 0.5) -> dict[str, float]:
    losses = a2c_losses(net, obs, actions, targets, entropy_weight, value_weight)
    optimizer.zero_grad(set_to_none=True)
    losses["total"].backward()
    optimizer.step()
    return {k: float(v.detach()) for k, v in losses.items()}


@dataclass
class TrainConfig:
    workers: int = 8
    nsteps: int = 20
    gamma: float = 0.99
    entropy_weight: float = 0.01
    value_weight: float = 0.5
    lr: float = 7e-4
    total_updates: int = 1000
    seed: int = 0
    metrics_every: int = 50
    eval_every: int = 100
    # Stop early once the deterministic evaluation reaches this score.
    target_score: float | None = None


def train_a2c(env_config: EnvConfig, config: TrainConfig,
              net: PolicyNet | None = None,
              eval_fn: Callable[[PolicyNet], float] | None = None,
              after_update: Callable[[int, PolicyNet, float | None], None] | None = None,
              on_metrics: Callable[[MetricsRecord], None] | None = None):
    """Synchronous A2C over `workers` lockstep environments.

    Returns (net, metrics, info). `after_update(update_idx, net, r_hat)` runs
    at the exclusive update barrier (used for gated off-policy updates);
    `eval_fn` is called every `eval_every` updates and drives the optional
    early stop at `target_score`.
    """
    torch.manual_seed(config.seed)
    if net is None:
        probe = make_env(env_config)
        net = build_policy(probe.n_actions, init="orthogonal", seed=config.seed)
    optimizer = make_optimizer("rmsprop", net, lr=config.lr)
    gen = torch.Generator().manual_seed(config.seed + 1)

    envs = [make_env(env_config) for _ in range(config.workers)]
    histories = [FrameHistory() for _ in range(config.workers)]
    episode_counts = [0] * config.workers
    episode_scores = [0.0] * config.workers
    obs = np.empty((config.workers, 4, 84, 84), dtype=np.float32)
    for i, (env, hist) in enumerate(zip(envs, histories)):
        frame = env.reset(_worker_seed(config.seed, i, 0))
        obs[i] = hist.reset(frame)

    recent = deque(maxlen=max(30, config.workers))
    recent_w = deque(maxlen=config.workers)  # window for the off-policy gate
    metrics: list[MetricsRecord] = []
    info = {"frames_to_target": None, "eval_scores": []}
    episodes_done = 0
    start = time.monotonic()

    for update in range(1, config.total_updates + 1):
        batch_obs = np.empty((config.nsteps, config.workers, 4, 84, 84), dtype=np.float32)
        batch_actions = torch.empty((config.nsteps, config.workers), dtype=torch.long)
        batch_rewards = torch.zeros((config.workers, config.nsteps))
        batch_dones = torch.zeros((config.workers, config.nsteps), dtype=torch.bool)

        for t in range(config.nsteps):
            batch_obs[t] = obs
            obs_t = torch.from_numpy(obs)
            with torch.no_grad():
                probs, _ = policy_output(net, obs_t)
            actions = select_actions(probs, "stochastic", gen)
            batch_actions[t] = actions
            for i, env in enumerate(envs):
                frame, reward, done = env.step(int(actions[i]))
                batch_rewards[i, t] = reward
                episode_scores[i] += reward
                if done:
                    batch_dones[i, t] = True
                    recent.append(episode_scores[i])
                    recent_w.append(episode_scores[i])
                    episodes_done += 1
                    episode_scores[i] = 0.0
                    episode_counts[i] += 1
                    frame = env.reset(_worker_seed(config.seed, i, episode_counts[i]))
                    obs[i] = histories[i].reset(frame)
                else:
                    obs[i] = histories[i].push(frame)

        with torch.no_grad():
            _, bootstrap = policy_output(net, torch.from_numpy(obs))
        targets = nstep_returns(batch_rewards, batch_dones, bootstrap, config.gamma)

        flat_obs = torch.from_numpy(batch_obs).transpose(0, 1).reshape(-1, 4, 84, 84)
        flat_actions = batch_actions.transpose(0, 1).reshape(-1)
        flat_targets = targets.reshape(-1)
        a2c_update(net, optimizer, flat_obs, flat_actions, flat_targets,
                   config.entropy_weight, config.value_weight)

        if after_update is not None:
            r_hat = float(np.mean(recent_w)) if recent_w else None
            after_update(update, net, r_hat)

        if config.metrics_every and update % config.metrics_every == 0:
            rec = MetricsRecord(
                wall_time_s=time.monotonic() - start,
                frames=update * config.workers * config.nsteps,
                updates=update,
                mean_reward=float(np.mean(recent)) if recent else 0.0,
                std_reward=float(np.std(recent)) if recent else 0.0,
                episodes=episodes_done,
            )
            metrics.append(rec)
            if on_metrics is not None:
                on_metrics(rec)

        if eval_fn is not None and config.eval_every and update % config.eval_every == 0:
            score = eval_fn(net)
            info["eval_scores"].append((update, score))
            if config.target_score is not None and score >= config.target_score:
                info["frames_to_target"] = update * config.workers * config.nsteps
                break

    return net, metrics, info


def _worker_seed(seed: int, worker: int, episode: int) -> int:
    return (seed * 1_000_003 + worker * 7919 + episode * 104_729) % (2 ** 31)


def apply_finetune_setting(source_net: PolicyNet, setting: str, seed: int) -> PolicyNet:
    """Produce the initial network for one of the five fine-tuning settings."""
    if setting not in FINETUNE_SETTINGS:
        raise ConfigError(f"unknown fine-tune setting: {setting!r}")
    fresh = build_policy(source_net.n_actions, init="orthogonal", seed=seed,
                         stack=source_net.stack)
    if setting == "from-scratch":
        return fresh
    net = copy.deepcopy(source_net)
    for p in net.parameters():
        p.requires_grad_(True)
    if setting == "full-ft":
        return net
    if setting == "random-output":
        with torch.no_grad():
            for layer in OUTPUT_LAYERS:
                getattr(net, layer).weight.copy_(getattr(fresh, layer).weight)
                getattr(net, layer).bias.copy_(getattr(fresh, layer).bias)
        return net
    conv_params = [f"{l}.{kind}" for l in CONV_LAYERS for kind in ("weight", "bias")]
    if setting == "partial-ft":
        freeze_(net, conv_params)
        return net
    # partial-random-ft: frozen source convs on top of a random remainder.
    with torch.no_grad():
        for layer in CONV_LAYERS:
            getattr(fresh, layer).weight.copy_(getattr(net, layer).weight)
            getattr(fresh, layer).bias.copy_(getattr(net, layer).bias)
    freeze_(fresh, conv_params)
    return fresh
