"""Imitation learning from imperfect transferred demonstrations.

Pipeline: measure a deterministic reference score through the translator,
collect stochastic trajectories and keep only those scoring above
beta1 * reference, pretrain a fresh network on the kept (state, action,
return) triples, then run A2C with gated off-policy supervised updates that
switch off once the agent outperforms beta2 * reference (and back on if it
degrades).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .agent import PolicyNet, TrainConfig, build_policy, policy_output, select_actions, train_a2c
from .checkpoint import load_tensors, save_tensors
from .envs import EnvConfig, FrameHistory, make_env
from .errors import ContractViolation, CorruptCheckpointError
from .numerics import check_finite, make_optimizer
from .transfer import eval_with_translation, resolve_translator

PROB_EPS = 1e-7


@dataclass
class GateState:
    beta1: float = 0.75
    beta2: float = 0.6
    reference_score: float = 0.0
    op_interval: int = 100

    def __post_init__(self):
        if not (0.0 < self.beta1 <= 1.0 and 0.0 < self.beta2 <= 1.0):
            raise ValueError("beta1 and beta2 must lie in (0, 1]")


@dataclass
class Trajectory:
    observations: np.ndarray  # (T, stack, H, W) raw target-domain observations
    actions: np.ndarray       # (T,)
    rewards: np.ndarray       # (T,)

    @property
    def score(self) -> float:
        return float(self.rewards.sum())


@dataclass
class DemoBuffer:
    observations: np.ndarray  # (N, stack, H, W)
    actions: np.ndarray       # (N,)
    returns: np.ndarray       # (N,)
    reference_score: float = 0.0

    def __len__(self) -> int:
        return len(self.actions)

    @classmethod
    def empty(cls, reference_score: float = 0.0, stack: int = 4) -> "DemoBuffer":
        return cls(np.empty((0, stack, 84, 84), np.float32), np.empty(0, np.int64),
                   np.empty(0, np.float32), reference_score)


def compute_returns(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """Discounted suffix returns R_t = sum_{k>=t} gamma^(k-t) r_k."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.empty_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        out[t] = running
    return out


def measure_reference_score(net: PolicyNet, translator, env_config: EnvConfig,
                            seed: int = 0, episodes: int = 1,
                            mode: str = "deterministic") -> float:
    """Mean episode score of the acting policy through the translator."""
    report = eval_with_translation(net, translator, env_config,
                                   episodes=episodes, mode=mode, seed=seed)
    return report.mean_score


def trajectory_accepted(score: float, gate: GateState) -> bool:
    """Strict filter: keep a trajectory iff score > beta1 * reference.

    With a degenerate (non-positive) reference only strictly positive scores
    are kept.
    """
    if gate.reference_score <= 0.0:
        return score > 0.0
    return score > gate.beta1 * gate.reference_score


def collect_demonstrations(net: PolicyNet, translator, env_config: EnvConfig,
                           n_trajectories: int, gate: GateState, seed: int = 0,
                           gamma: float = 0.99, stack: int = 4) -> DemoBuffer:
    """Run stochastic episodes through the translator and keep the good ones.

    The stored observations are the raw (untranslated) target-domain stacks;
    the translator only shapes what the acting policy sees.
    """
    if n_trajectories < 1:
        raise ContractViolation("n_trajectories must be >= 1")
    translator = resolve_translator(translator)
    env = make_env(env_config)
    gen = torch.Generator().manual_seed(seed)
    obs_chunks, act_chunks, ret_chunks = [], [], []
    frames = 0
    for ep in range(n_trajectories):
        raw_hist = FrameHistory(stack)
        seen_hist = FrameHistory(stack)
        frame = env.reset(seed * 9176 + ep)
        raw_obs = raw_hist.reset(frame)
        seen_obs = seen_hist.reset(translator(env, frame))
        observations, actions, rewards = [], [], []
        done = False
        while not done:
            obs_t = torch.as_tensor(seen_obs, dtype=torch.float32).unsqueeze(0)
            with torch.no_grad():
                probs, _ = policy_output(net, obs_t)
            action = int(select_actions(probs, "stochastic", gen)[0])
            observations.append(raw_obs)
            actions.append(action)
            frame, reward, done = env.step(action)
            rewards.append(reward)
            frames += 1
            if not done:
                raw_obs = raw_hist.push(frame)
                seen_obs = seen_hist.push(translator(env, frame))
        traj = Trajectory(np.asarray(observations, np.float32),
                          np.asarray(actions, np.int64),
                          np.asarray(rewards, np.float32))
        if trajectory_accepted(traj.score, gate):
            obs_chunks.append(traj.observations)
            act_chunks.append(traj.actions)
            ret_chunks.append(compute_returns(traj.rewards, gamma).astype(np.float32))
    if not obs_chunks:
        warnings.warn("all trajectories were filtered out; demonstration buffer is empty")
        buf = DemoBuffer.empty(gate.reference_score, stack)
    else:
        buf = DemoBuffer(np.concatenate(obs_chunks), np.concatenate(act_chunks),
                         np.concatenate(ret_chunks), gate.reference_score)
    buf.frames_consumed = frames
    return buf


def il_losses(net: PolicyNet, obs: torch.Tensor, actions: torch.Tensor,
              returns: torch.Tensor) -> dict[str, torch.Tensor]:
    """Per-dimension binary cross-entropy to the one-hot demo action plus a
    half squared error of the value head against the stored return."""
    logits, values = net(obs)
    probs = F.softmax(logits, dim=-1).clamp(PROB_EPS, 1.0 - PROB_EPS)
    onehot = F.one_hot(actions, num_classes=probs.shape[-1]).float()
    per_dim = onehot * probs.log() + (1.0 - onehot) * (1.0 - probs).log()
    policy_loss = -(per_dim.sum(dim=-1) / probs.shape[-1]).mean()
    value_loss = 0.5 * ((returns - values) ** 2).mean()
    total = policy_loss + value_loss
    check_finite(total, "imitation loss")
    return {"total": total, "policy": policy_loss, "value": value_loss}


def il_update(net: PolicyNet, optimizer: torch.optim.Optimizer,
              obs: torch.Tensor, actions: torch.Tensor,
              returns: torch.Tensor) -> dict[str, float]:
    losses = il_losses(net, obs, actions, returns)
    optimizer.zero_grad(set_to_none=True)
    losses["total"].backward()
    optimizer.step()
    return {k: float(v.detach()) for k, v in losses.items()}


def sample_batch(buffer: DemoBuffer, batch_size: int, gen: torch.Generator):
    idx = torch.randint(len(buffer), (batch_size,), generator=gen)
    return (torch.as_tensor(buffer.observations[idx.numpy()], dtype=torch.float32),
            torch.as_tensor(buffer.actions[idx.numpy()], dtype=torch.long),
            torch.as_tensor(buffer.returns[idx.numpy()], dtype=torch.float32))


def pretrain(net: PolicyNet, buffer: DemoBuffer, iterations: int = 500,
             batch_size: int = 4, seed: int = 0, lr: float = 7e-4) -> PolicyNet:
    """Supervised warm start on uniformly sampled demonstration batches."""
    if len(buffer) == 0:
        raise ContractViolation("demonstration buffer is empty")
    optimizer = make_optimizer("sgd-momentum", net, lr=lr)
    gen = torch.Generator().manual_seed(seed + 3)
    for _ in range(iterations):
        obs, actions, returns = sample_batch(buffer, batch_size, gen)
        il_update(net, optimizer, obs, actions, returns)
    return net


def should_offpolicy_update(update_index: int, r_hat: float | None,
                            gate: GateState) -> bool:
    """Off-policy gate: fires on interval boundaries while the agent's mean
    reward sits below beta2 * reference; re-enables after degradation.

    A missing r_hat (no completed episodes yet) counts as below the bar; a
    non-positive reference disables the gate entirely.
    """
    if update_index % gate.op_interval != 0:
        return False
    if gate.reference_score <= 0.0:
        return False
    if r_hat is None:
        return True
    return r_hat < gate.beta2 * gate.reference_score


def train_il(env_config: EnvConfig, buffer: DemoBuffer, gate: GateState,
             config: TrainConfig, net: PolicyNet | None = None,
             batch_size: int = 4, sgd_lr: float = 7e-4,
             supervised_iterations: int = 500,
             eval_fn=None, on_metrics=None):
    """Algorithm stages 2+3: supervised pretraining, then A2C with gated
    off-policy updates from the demonstration buffer."""
    if net is None:
        probe = make_env(env_config)
        net = build_policy(probe.n_actions, init="orthogonal", seed=config.seed)
    if len(buffer) == 0:
        raise ContractViolation("demonstration buffer is empty")
    pretrain(net, buffer, supervised_iterations, batch_size, config.seed, sgd_lr)

    off_opt = make_optimizer("sgd-momentum", net, lr=sgd_lr)
    gen = torch.Generator().manual_seed(config.seed + 4)

    def after_update(update_index: int, live_net: PolicyNet, r_hat: float | None):
        if should_offpolicy_update(update_index, r_hat, gate):
            obs, actions, returns = sample_batch(buffer, batch_size, gen)
            il_update(live_net, off_opt, obs, actions, returns)

    return train_a2c(env_config, config, net=net, eval_fn=eval_fn,
                     after_update=after_update, on_metrics=on_metrics)


def save_demo_buffer(path: str | Path, buffer: DemoBuffer) -> None:
    save_tensors(path, {
        "observations": buffer.observations,
        "actions": buffer.actions.astype(np.float32),
        "returns": buffer.returns,
    }, {"kind": "demo-buffer", "count": len(buffer),
        "reference_score": buffer.reference_score})


def load_demo_buffer(path: str | Path) -> DemoBuffer:
    tensors, meta = load_tensors(path)
    if meta.get("kind") != "demo-buffer":
        raise CorruptCheckpointError(f"{path}: not a demonstration buffer")
    return DemoBuffer(
        observations=tensors["observations"],
        actions=tensors["actions"].astype(np.int64),
        returns=tensors["returns"],
        reference_score=float(meta.get("reference_score", 0.0)),
    )
