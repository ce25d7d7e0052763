"""Pixel game environments, preprocessing, and the ground-truth skin oracle."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from . import breakout, roadlite
from .breakout import BreakoutLite
from .roadlite import RoadLite
from .preprocess import FrameHistory, preprocess, to_gray, resize_nn
from .frameset import read_frames, write_frames


@dataclass(frozen=True)
class EnvConfig:
    game: str = "breakout"          # "breakout" | "roadlite"
    skin: str | int = "source"      # variant name or level number
    max_steps: int = 10_000

    def source(self) -> "EnvConfig":
        src = "source" if self.game == "breakout" else 1
        return EnvConfig(self.game, src, self.max_steps)


def make_env(config: EnvConfig):
    if config.game == "breakout":
        return BreakoutLite(variant=str(config.skin), max_steps=config.max_steps)
    if config.game == "roadlite":
        return RoadLite(level=int(config.skin), max_steps=config.max_steps)
    raise ConfigError(f"unknown game: {config.game!r}")


def render_variant(state, skin):
    """Pure render of a game state under any compatible skin."""
    if isinstance(state, breakout.BreakoutState):
        return breakout.render_frame(state, skin)
    if isinstance(state, roadlite.RoadState):
        return roadlite.render_frame(state, int(skin))
    raise ConfigError(f"unknown state type: {type(state).__name__}")


def oracle_translate(state, from_skin, to_skin):
    """Ground-truth translation: re-render the underlying state in `to_skin`.

    `from_skin` is accepted for interface symmetry; the render depends only on
    (state, to_skin).
    """
    return render_variant(state, to_skin)
