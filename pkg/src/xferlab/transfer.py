"""Zero-shot transfer evaluation and task-score checkpoint selection.

A policy trained on the source skin plays a target environment while every
raw frame is routed through a translator (identity, the ground-truth oracle,
or a learned generator) before preprocessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .agent import PolicyNet, policy_output, select_actions
from .envs import EnvConfig, FrameHistory, make_env, render_variant
from .errors import ContractViolation
from .translate import TranslatorPair, load_translator, translate


@dataclass
class EvalReport:
    checkpoint_id: str
    episodes: int
    scores: list[float]
    mean_score: float
    frames: int


class IdentityTranslator:
    def __call__(self, env, frame: np.ndarray) -> np.ndarray:
        return frame


class OracleTranslator:
    """Re-renders the live game state in the source skin: exact ground truth."""

    def __call__(self, env, frame: np.ndarray) -> np.ndarray:
        return render_variant(env.state, env.source_skin)


class PairTranslator:
    def __init__(self, pair: TranslatorPair, direction: str = "t2s"):
        self.pair = pair
        self.direction = direction

    def __call__(self, env, frame: np.ndarray) -> np.ndarray:
        return translate(self.pair, frame, self.direction)


def resolve_translator(spec) -> object:
    """Accept 'identity', 'oracle', a TranslatorPair, a checkpoint path, or a callable."""
    if spec == "identity":
        return IdentityTranslator()
    if spec == "oracle":
        return OracleTranslator()
    if isinstance(spec, TranslatorPair):
        return PairTranslator(spec)
    if isinstance(spec, (str, Path)):
        return PairTranslator(load_translator(spec))
    if callable(spec):
        return spec
    raise ValueError(f"cannot interpret translator spec: {spec!r}")


def eval_with_translation(net: PolicyNet, translator, env_config: EnvConfig,
                          episodes: int = 10, mode: str = "deterministic",
                          seed: int = 0, checkpoint_id: str = "",
                          stack: int = 4) -> EvalReport:
    """Play episodes with every raw frame translated before preprocessing.

    Rewards are the true environment rewards; the translation only affects
    what the policy sees.
    """
    if episodes < 1:
        raise ContractViolation("episodes must be >= 1")
    translator = resolve_translator(translator)
    env = make_env(env_config)
    gen = torch.Generator().manual_seed(seed)
    scores: list[float] = []
    frames = 0
    for ep in range(episodes):
        frame = env.reset(seed + ep)
        history = FrameHistory(stack)
        obs = history.reset(translator(env, frame))
        total = 0.0
        done = False
        while not done:
            obs_t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            with torch.no_grad():
                probs, _ = policy_output(net, obs_t)
            action = int(select_actions(probs, mode, gen)[0])
            frame, reward, done = env.step(action)
            frames += 1
            total += reward
            if not done:
                obs = history.push(translator(env, frame))
        scores.append(total)
    return EvalReport(
        checkpoint_id=checkpoint_id,
        episodes=episodes,
        scores=scores,
        mean_score=float(np.mean(scores)),
        frames=frames,
    )


def select_checkpoint(checkpoints: list[tuple[int, Path]], net: PolicyNet,
                      env_config: EnvConfig, eval_every: int = 1000,
                      episodes: int = 10, seed: int = 0,
                      mode: str = "deterministic") -> tuple[int, list[EvalReport]]:
    """Score every eval_every-th translator checkpoint by playing through it.

    Returns the iteration id of the earliest checkpoint achieving the maximum
    mean score, plus the reports in checkpoint order.
    """
    if not checkpoints:
        raise ContractViolation("checkpoint stream is empty")
    selected = [(it, path) for it, path in checkpoints if it % eval_every == 0]
    if not selected:  # interval coarser than the stream: score everything
        selected = list(checkpoints)
    reports: list[EvalReport] = []
    best_id, best_score = None, -np.inf
    for iteration, path in selected:
        report = eval_with_translation(
            net, str(path), env_config, episodes=episodes, mode=mode, seed=seed,
            checkpoint_id=str(iteration))
        reports.append(report)
        if report.mean_score > best_score:
            best_id, best_score = iteration, report.mean_score
    return best_id, reports
