"""RoadLite: a deterministic vertical-scrolling driving game at 3x84x84.

The car's lateral position and all obstacle lanes live in normalized
coordinates (-1..1 across the drivable width), so the dynamics are identical
for every level: levels only change the rendered road width, palette,
roadside texture, and (levels 3-4) a visual road sway. Obstacles are either
hostile (crash on contact) or bonus cars (+10 when collected).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ContractViolation

LEVELS = (1, 2, 3, 4)

H = W = 84
PLAYER_Y = 66        # top row of the player car sprite
CAR_W = 6
CAR_H = 8
STEER = 0.08         # normalized lateral move per action step
HIT_RADIUS = 0.22    # normalized lateral distance counting as contact
ROW_REWARD = 0.1
BONUS_REWARD = 10.0
TRACK_ROWS = 1200
OBSTACLE_PERIOD = 14  # candidate spawn every this many rows
BONUS_EVERY = 4       # every 4th obstacle is a bonus car

ACTIONS = ("noop", "left", "right")

# Rendered geometry/palette per level. half_width is the drawn road half-width
# in pixels; sway_amp/sway_period control the visual-only road curvature.
LEVEL_SKINS = {
    1: dict(half_width=32, road=(0.32, 0.32, 0.34), off=(0.10, 0.45, 0.12),
            stripe=(0.85, 0.85, 0.85), stripe_period=8, sway_amp=0, sway_period=1),
    2: dict(half_width=24, road=(0.38, 0.34, 0.28), off=(0.65, 0.55, 0.25),
            stripe=(0.90, 0.35, 0.20), stripe_period=6, sway_amp=0, sway_period=1),
    3: dict(half_width=16, road=(0.28, 0.28, 0.38), off=(0.80, 0.82, 0.88),
            stripe=(0.20, 0.60, 0.90), stripe_period=10, sway_amp=7, sway_period=96),
    4: dict(half_width=21, road=(0.30, 0.26, 0.26), off=(0.40, 0.38, 0.36),
            stripe=(0.95, 0.80, 0.20), stripe_period=5, sway_amp=10, sway_period=64),
}


@dataclass
class RoadState:
    offset: float            # player lane offset in [-1, 1]
    scroll: int              # rows advanced since reset
    obstacles: tuple         # ((row, lane, kind), ...) with kind "hostile"|"bonus"
    collected: frozenset     # indices of collected bonus obstacles
    level: int
    step_count: int
    crashed: bool = False
    score: float = 0.0

    def copy(self) -> "RoadState":
        return RoadState(**self.__dict__)


def _make_obstacles(seed: int) -> tuple:
    """Seed-determined obstacle schedule, identical across levels."""
    rng = np.random.default_rng(seed)
    obstacles = []
    count = 0
    for row in range(40, TRACK_ROWS, OBSTACLE_PERIOD):
        jitter = int(rng.integers(0, 6))
        lane = float(np.round(rng.uniform(-0.75, 0.75), 3))
        kind = "bonus" if count % BONUS_EVERY == BONUS_EVERY - 1 else "hostile"
        obstacles.append((row + jitter, lane, kind))
        count += 1
    return tuple(obstacles)


class RoadLite:
    n_actions = len(ACTIONS)
    game = "roadlite"
    source_skin = 1

    def __init__(self, level: int = 1, max_steps: int = 10_000):
        if level not in LEVELS:
            raise ConfigError(f"unknown RoadLite level: {level!r}")
        self.level = level
        self.max_steps = max_steps
        self.state: RoadState | None = None

    def reset(self, seed: int) -> np.ndarray:
        self.state = RoadState(
            offset=0.0,
            scroll=0,
            obstacles=_make_obstacles(seed),
            collected=frozenset(),
            level=self.level,
            step_count=0,
        )
        return self.render()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.state is None:
            raise ContractViolation("step before reset")
        if not 0 <= action < self.n_actions:
            raise ContractViolation(f"action {action} outside [0, {self.n_actions})")
        s = self.state
        if action == 1:
            s.offset = round(s.offset - STEER, 6)
        elif action == 2:
            s.offset = round(s.offset + STEER, 6)

        s.scroll += 1
        s.step_count += 1
        reward = 0.0
        done = False

        if abs(s.offset) > 1.0:
            s.crashed = True
            done = True
        else:
            reward = ROW_REWARD
            for idx, (row, lane, kind) in enumerate(s.obstacles):
                if row != s.scroll:
                    continue
                if idx in s.collected or abs(s.offset - lane) >= HIT_RADIUS:
                    continue
                if kind == "bonus":
                    reward += BONUS_REWARD
                    s.collected = s.collected | {idx}
                else:
                    s.crashed = True
                    done = True

        if s.scroll >= TRACK_ROWS or s.step_count >= self.max_steps:
            done = True
        s.score += reward
        return self.render(), reward, done

    def render(self, level: int | None = None) -> np.ndarray:
        return render_frame(self.state, self.level if level is None else level)


def _center_x(skin: dict, world_row: int) -> int:
    if skin["sway_amp"] == 0:
        return W // 2
    phase = 2.0 * np.pi * (world_row % skin["sway_period"]) / skin["sway_period"]
    return W // 2 + int(round(skin["sway_amp"] * np.sin(phase)))


def _lane_to_x(skin: dict, center: int, lane: float) -> int:
    usable = skin["half_width"] - CAR_W // 2 - 1
    return int(round(center + lane * usable)) - CAR_W // 2


def render_frame(state: RoadState, level: int) -> np.ndarray:
    """Pure render of a state under a level skin, float32 (3, 84, 84) in [0,1]."""
    if level not in LEVELS:
        raise ConfigError(f"unknown RoadLite level: {level!r}")
    skin = LEVEL_SKINS[level]
    f = np.empty((3, H, W), dtype=np.float32)
    off = np.array(skin["off"], dtype=np.float32)
    road = np.array(skin["road"], dtype=np.float32)
    stripe = np.array(skin["stripe"], dtype=np.float32)
    f[:] = off[:, None, None]

    # Screen row y shows world row (scroll + PLAYER_Y - y): rows ahead of the
    # car appear above it and approach as the car advances.
    for y in range(H):
        world_row = state.scroll + (PLAYER_Y - y)
        cx = _center_x(skin, world_row)
        x0 = max(0, cx - skin["half_width"])
        x1 = min(W, cx + skin["half_width"])
        f[:, y, x0:x1] = road[:, None]
        # Edge stripes give the roadside a per-level texture.
        if (world_row // skin["stripe_period"]) % 2 == 0:
            if x0 >= 2:
                f[:, y, x0 - 2:x0] = stripe[:, None]
            if x1 <= W - 2:
                f[:, y, x1:x1 + 2] = stripe[:, None]

    # Obstacles within the visible window.
    for idx, (row, lane, kind) in enumerate(state.obstacles):
        if idx in state.collected:
            continue
        y = PLAYER_Y - (row - state.scroll)
        if y < -CAR_H or y > H:
            continue
        cx = _center_x(skin, row)
        x = _lane_to_x(skin, cx, lane)
        # Deep red keeps hostile cars high-contrast against every road gray
        # after luma conversion (luma ~0.12 vs ~0.33 road).
        color = (0.35, 0.02, 0.02) if kind == "hostile" else (0.20, 0.90, 0.95)
        y0, y1 = max(0, y), min(H, y + CAR_H)
        x0, x1 = max(0, x), min(W, x + CAR_W)
        if y0 < y1 and x0 < x1:
            f[0, y0:y1, x0:x1] = color[0]
            f[1, y0:y1, x0:x1] = color[1]
            f[2, y0:y1, x0:x1] = color[2]

    # Player car.
    cx = _center_x(skin, state.scroll)
    x = _lane_to_x(skin, cx, max(-1.0, min(1.0, state.offset)))
    x0, x1 = max(0, x), min(W, x + CAR_W)
    f[0, PLAYER_Y:PLAYER_Y + CAR_H, x0:x1] = 0.98
    f[1, PLAYER_Y:PLAYER_Y + CAR_H, x0:x1] = 0.95
    f[2, PLAYER_Y:PLAYER_Y + CAR_H, x0:x1] = 0.25
    return f
