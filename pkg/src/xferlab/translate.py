"""Unaligned frame-to-frame translation with cycle consistency.

Two residual generators (target->source and source->target) and two
least-squares discriminators. The "shared-inner" mode stores one set of inner
residual blocks used by both generators; "independent" keeps the generators
fully separate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .checkpoint import load_tensors, save_tensors
from .errors import ContractViolation, CorruptCheckpointError
from .envs import EnvConfig, make_env
from .numerics import apply_init, check_finite, make_optimizer

SHARING_MODES = ("shared-inner", "independent")


class ResidualBlocks(nn.Module):
    """Two 3x3 residual blocks; the shareable core of a generator."""

    def __init__(self, channels: int = 32):
        super().__init__()
        self.b1a = nn.Conv2d(channels, channels, 3, padding=1)
        self.b1b = nn.Conv2d(channels, channels, 3, padding=1)
        self.b2a = nn.Conv2d(channels, channels, 3, padding=1)
        self.b2b = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        h = h + self.b1b(F.leaky_relu(self.b1a(h), 0.2))
        h = h + self.b2b(F.leaky_relu(self.b2a(h), 0.2))
        return h


class Generator(nn.Module):
    """Downsample twice, run residual blocks, upsample back, add to the input.

    The network emits a delta image, so zero weights give the identity map and
    unchanged regions cost nothing to represent.
    """

    def __init__(self, inner: ResidualBlocks | None = None, channels: int = 16):
        super().__init__()
        c = channels
        self.enc1 = nn.Conv2d(3, c, 4, stride=2, padding=1)
        self.enc2 = nn.Conv2d(c, 2 * c, 4, stride=2, padding=1)
        self.inner = inner if inner is not None else ResidualBlocks(2 * c)
        self.dec1 = nn.ConvTranspose2d(2 * c, c, 4, stride=2, padding=1)
        self.dec2 = nn.ConvTranspose2d(c, 3, 4, stride=2, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # Leaky activations keep the delta path trainable even after the
        # cycle objective has pushed it to (near) zero; with plain relu the
        # path can die and freeze the generator at the identity.
        h = F.leaky_relu(self.enc1(x), 0.2)
        h = F.leaky_relu(self.enc2(h), 0.2)
        h = self.inner(h)
        h = F.leaky_relu(self.dec1(h), 0.2)
        return x + self.dec2(h)


class Discriminator(nn.Module):
    """Three strided convolutions producing a patch score map."""

    def __init__(self, channels: int = 16):
        super().__init__()
        c = channels
        self.c1 = nn.Conv2d(3, c, 4, stride=2, padding=1)
        self.c2 = nn.Conv2d(c, 2 * c, 4, stride=2, padding=1)
        self.c3 = nn.Conv2d(2 * c, 1, 3, stride=1, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = F.leaky_relu(self.c1(x), 0.2)
        h = F.leaky_relu(self.c2(h), 0.2)
        return self.c3(h)


@dataclass
class TranslatorPair:
    g1: Generator  # target -> source
    g2: Generator  # source -> target
    d1: Discriminator  # judges target-domain images
    d2: Discriminator  # judges source-domain images
    sharing: str = "independent"

    def generators(self) -> nn.ModuleList:
        return nn.ModuleList([self.g1, self.g2])

    def discriminators(self) -> nn.ModuleList:
        return nn.ModuleList([self.d1, self.d2])


def build_translator(sharing: str = "shared-inner", init: str = "xavier",
                     seed: int = 0) -> TranslatorPair:
    if sharing not in SHARING_MODES:
        raise ValueError(f"unknown sharing mode: {sharing!r}")
    if sharing == "shared-inner":
        inner = ResidualBlocks()
        g1, g2 = Generator(inner), Generator(inner)
    else:
        g1, g2 = Generator(), Generator()
    pair = TranslatorPair(g1, g2, Discriminator(), Discriminator(), sharing)
    apply_init(pair.generators(), init, seed)
    apply_init(pair.discriminators(), init, seed + 1)
    return pair


def translate(pair: TranslatorPair, frame: np.ndarray, direction: str = "t2s") -> np.ndarray:
    """Translate one frame; output has the same shape, clamped to [0, 1]."""
    if frame.shape[0] != 3 or frame.ndim != 3:
        raise ContractViolation(f"expected a (3, H, W) frame, got {frame.shape}")
    gen = pair.g1 if direction == "t2s" else pair.g2
    if direction not in ("t2s", "s2t"):
        raise ValueError(f"unknown direction: {direction!r}")
    with torch.no_grad():
        out = gen(torch.as_tensor(frame, dtype=torch.float32).unsqueeze(0))
    return out.squeeze(0).clamp(0.0, 1.0).numpy()


def cycle_loss(pair: TranslatorPair, s: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
    rec_t = pair.g2(pair.g1(t))
    rec_s = pair.g1(pair.g2(s))
    return (rec_t - t).abs().mean() + (rec_s - s).abs().mean()


def gan_update(pair: TranslatorPair, batch_s: torch.Tensor, batch_t: torch.Tensor,
               d_opt: torch.optim.Optimizer, g_opt: torch.optim.Optimizer,
               lam_cyc: float = 10.0) -> dict[str, float]:
    """One discriminator step followed by one generator step (batch size 1)."""
    if batch_s.shape[0] != 1 or batch_t.shape[0] != 1:
        raise ContractViolation("gan_update expects batch size 1 on both sides")

    with torch.no_grad():
        fake_s = pair.g1(batch_t)
        fake_t = pair.g2(batch_s)
    d_loss = 0.5 * (
        F.mse_loss(pair.d2(batch_s), torch.ones_like(pair.d2(batch_s)))
        + F.mse_loss(pair.d2(fake_s), torch.zeros_like(pair.d2(fake_s)))
        + F.mse_loss(pair.d1(batch_t), torch.ones_like(pair.d1(batch_t)))
        + F.mse_loss(pair.d1(fake_t), torch.zeros_like(pair.d1(fake_t)))
    )
    check_finite(d_loss, "discriminator loss")
    d_opt.zero_grad(set_to_none=True)
    d_loss.backward()
    d_opt.step()

    fake_s = pair.g1(batch_t)
    fake_t = pair.g2(batch_s)
    adv = (
        F.mse_loss(pair.d2(fake_s), torch.ones_like(pair.d2(fake_s)))
        + F.mse_loss(pair.d1(fake_t), torch.ones_like(pair.d1(fake_t)))
    )
    cyc = (pair.g2(fake_s) - batch_t).abs().mean() + (pair.g1(fake_t) - batch_s).abs().mean()
    g_loss = adv + lam_cyc * cyc
    check_finite(g_loss, "generator loss")
    g_opt.zero_grad(set_to_none=True)
    g_loss.backward()
    g_opt.step()

    return {
        "d_loss": float(d_loss.detach()),
        "g_adv": float(adv.detach()),
        "g_cycle": float(cyc.detach()),
        "g_loss": float(g_loss.detach()),
    }


@dataclass
class GanTrainConfig:
    iterations: int = 20_000
    checkpoint_interval: int = 1_000
    out_dir: str = "checkpoints"
    lam_cyc: float = 10.0
    lr: float = 5e-4
    sharing: str = "shared-inner"
    init: str = "xavier"
    seed: int = 0


def train_translator(frames_s: np.ndarray, frames_t: np.ndarray,
                     config: GanTrainConfig,
                     pair: TranslatorPair | None = None) -> list[tuple[int, Path]]:
    """Iterate gan_update over uniformly sampled singleton batches.

    Writes a checkpoint every checkpoint_interval iterations and returns the
    (iteration, path) stream in order.
    """
    if len(frames_s) == 0 or len(frames_t) == 0:
        raise ContractViolation("both datasets must be nonempty")
    torch.manual_seed(config.seed)
    if pair is None:
        pair = build_translator(config.sharing, config.init, config.seed)
    g_opt = make_optimizer("adam", pair.generators(), lr=config.lr)
    d_opt = make_optimizer("adam", pair.discriminators(), lr=config.lr)
    gen = torch.Generator().manual_seed(config.seed + 2)

    ts = torch.as_tensor(frames_s, dtype=torch.float32)
    tt = torch.as_tensor(frames_t, dtype=torch.float32)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    checkpoints: list[tuple[int, Path]] = []
    for it in range(1, config.iterations + 1):
        i = int(torch.randint(len(ts), (1,), generator=gen))
        j = int(torch.randint(len(tt), (1,), generator=gen))
        gan_update(pair, ts[i:i + 1], tt[j:j + 1], d_opt, g_opt, config.lam_cyc)
        if it % config.checkpoint_interval == 0:
            path = out_dir / f"translator_{it:07d}.rlgn"
            save_translator(path, pair)
            checkpoints.append((it, path))
    return checkpoints


def save_translator(path: str | Path, pair: TranslatorPair) -> None:
    tensors = {}
    for prefix, module in (("g1", pair.g1), ("g2", pair.g2), ("d1", pair.d1), ("d2", pair.d2)):
        for name, tensor in module.state_dict().items():
            tensors[f"{prefix}.{name}"] = tensor
    save_tensors(path, tensors, {"kind": "translator", "sharing": pair.sharing})


def load_translator(path: str | Path) -> TranslatorPair:
    tensors, meta = load_tensors(path)
    if meta.get("kind") != "translator":
        raise CorruptCheckpointError(f"{path}: not a translator checkpoint")
    pair = build_translator(meta["sharing"], init="constant(0)", seed=0)
    for prefix, module in (("g1", pair.g1), ("g2", pair.g2), ("d1", pair.d1), ("d2", pair.d2)):
        state = {name[len(prefix) + 1:]: torch.from_numpy(value)
                 for name, value in tensors.items() if name.startswith(prefix + ".")}
        module.load_state_dict(state)
    return pair


def collect_frames(env_config: EnvConfig, count: int, seed: int) -> np.ndarray:
    """Gather `count` frames with a uniformly random policy over repeated episodes.

    Episodes restart from the beginning of the game, so the dataset only holds
    early-game states.
    """
    if count < 1:
        raise ContractViolation("count must be >= 1")
    env = make_env(env_config)
    rng = np.random.default_rng(seed)
    frames: list[np.ndarray] = []
    episode = 0
    while len(frames) < count:
        frame = env.reset(seed * 100_003 + episode)
        frames.append(frame)
        done = False
        while not done and len(frames) < count:
            frame, _, done = env.step(int(rng.integers(env.n_actions)))
            frames.append(frame)
        episode += 1
    return np.asarray(frames[:count], dtype=np.float32)
