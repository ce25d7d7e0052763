"""BreakoutLite: a deterministic paddle-and-bricks game rendered at 3x84x84.

Dynamics are integer-valued and fully determined by (seed, action sequence).
Visual variants decorate the rendered frame only and never touch the state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ContractViolation

VARIANTS = ("source", "const-rect", "moving-square", "green-lines", "diagonals")

H = W = 84
WALL = 2
BRICK_ROWS = 6
BRICK_COLS = 12
BRICK_W = 6
BRICK_H = 3
BRICK_X0 = (W - BRICK_COLS * BRICK_W) // 2  # 6
BRICK_Y0 = 10
PADDLE_Y = 76
PADDLE_W = 14
PADDLE_H = 2
PADDLE_SPEED = 3
BALL = 2
MISS_Y = 81

ACTIONS = ("noop", "left", "right")

BRICK_ROW_COLORS = np.array([
    (0.78, 0.22, 0.18),
    (0.82, 0.52, 0.18),
    (0.78, 0.72, 0.16),
    (0.30, 0.70, 0.25),
    (0.22, 0.45, 0.80),
    (0.55, 0.30, 0.75),
], dtype=np.float32)

# (x, y) corners of the moving-square decoration's three predefined locations.
SQUARE_LOCATIONS = ((12, 38), (38, 52), (60, 34))
SQUARE_SIZE = 9
RECT_POS = (39, 48)  # const-rect top-left, brick-sized, in the ball's flight area


@dataclass
class BreakoutState:
    paddle_x: int
    ball_x: int
    ball_y: int
    ball_dx: int
    ball_dy: int
    bricks: np.ndarray  # bool (BRICK_ROWS, BRICK_COLS)
    lives: int
    step_count: int
    global_step: int
    serve_dir: int = 1  # alternates on respawn
    score: float = 0.0

    def copy(self) -> "BreakoutState":
        s = BreakoutState(**{**self.__dict__})
        s.bricks = self.bricks.copy()
        return s


def _serve(state: BreakoutState) -> None:
    # The ball drops toward the paddle: nothing scores until it is caught.
    state.ball_x = state.paddle_x + PADDLE_W // 2 - 1
    state.ball_y = 44
    state.ball_dx = 2 * state.serve_dir
    state.ball_dy = 2
    state.serve_dir = -state.serve_dir


class BreakoutLite:
    n_actions = len(ACTIONS)
    game = "breakout"
    source_skin = "source"

    def __init__(self, variant: str = "source", max_steps: int = 10_000):
        if variant not in VARIANTS:
            raise ConfigError(f"unknown BreakoutLite variant: {variant!r}")
        self.variant = variant
        self.max_steps = max_steps
        self._global_step = 0  # persists across resets within this instance
        self.state: BreakoutState | None = None

    def reset(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        self.state = BreakoutState(
            # Random start position keeps distinct seeds producing distinct
            # trajectories even under a deterministic policy.
            paddle_x=int(WALL + rng.integers(W - 2 * WALL - PADDLE_W + 1)),
            ball_x=0, ball_y=0, ball_dx=0, ball_dy=0,
            bricks=np.ones((BRICK_ROWS, BRICK_COLS), dtype=bool),
            lives=3,
            step_count=0,
            global_step=self._global_step,
            serve_dir=1 if rng.integers(2) == 0 else -1,
        )
        _serve(self.state)
        return self.render()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.state is None:
            raise ContractViolation("step before reset")
        if not 0 <= action < self.n_actions:
            raise ContractViolation(f"action {action} outside [0, {self.n_actions})")
        s = self.state
        reward = 0.0
        if action == 1:
            s.paddle_x = max(WALL, s.paddle_x - PADDLE_SPEED)
        elif action == 2:
            s.paddle_x = min(W - WALL - PADDLE_W, s.paddle_x + PADDLE_SPEED)

        # Horizontal motion with wall bounce.
        s.ball_x += s.ball_dx
        if s.ball_x < WALL:
            s.ball_x = 2 * WALL - s.ball_x
            s.ball_dx = -s.ball_dx
        elif s.ball_x > W - WALL - BALL:
            s.ball_x = 2 * (W - WALL - BALL) - s.ball_x
            s.ball_dx = -s.ball_dx

        # Vertical motion with top wall, bricks, and paddle.
        s.ball_y += s.ball_dy
        if s.ball_y < WALL:
            s.ball_y = 2 * WALL - s.ball_y
            s.ball_dy = -s.ball_dy

        hit = _brick_hit(s)
        if hit is not None:
            r, c = hit
            s.bricks[r, c] = False
            s.ball_dy = -s.ball_dy
            reward += 1.0

        if s.ball_dy > 0 and PADDLE_Y - BALL <= s.ball_y <= PADDLE_Y + PADDLE_H:
            if s.paddle_x - BALL < s.ball_x < s.paddle_x + PADDLE_W:
                s.ball_y = PADDLE_Y - BALL
                s.ball_dy = -s.ball_dy
                # Hit offset steers the ball; dx is never zero.
                offset = (s.ball_x + BALL // 2) - (s.paddle_x + PADDLE_W // 2)
                if offset < -3:
                    s.ball_dx = -2
                elif offset < 0:
                    s.ball_dx = -1
                elif offset <= 3:
                    s.ball_dx = 1
                else:
                    s.ball_dx = 2

        done = False
        if s.ball_y > MISS_Y:
            s.lives -= 1
            if s.lives <= 0:
                done = True
            else:
                _serve(s)

        s.step_count += 1
        s.global_step += 1
        self._global_step = s.global_step
        s.score += reward
        if not s.bricks.any() or s.step_count >= self.max_steps:
            done = True
        return self.render(), reward, done

    def render(self, variant: str | None = None) -> np.ndarray:
        return render_frame(self.state, self.variant if variant is None else variant)


def _brick_hit(s: BreakoutState) -> tuple[int, int] | None:
    # Topmost occupied cell overlapping the ball, if any.
    y0, y1 = s.ball_y, s.ball_y + BALL
    x0, x1 = s.ball_x, s.ball_x + BALL
    if y1 <= BRICK_Y0 or y0 >= BRICK_Y0 + BRICK_ROWS * BRICK_H:
        return None
    r0 = max(0, (y0 - BRICK_Y0) // BRICK_H)
    r1 = min(BRICK_ROWS - 1, (y1 - 1 - BRICK_Y0) // BRICK_H)
    c0 = max(0, (x0 - BRICK_X0) // BRICK_W)
    c1 = min(BRICK_COLS - 1, (x1 - 1 - BRICK_X0) // BRICK_W)
    for r in range(r0, r1 + 1):
        for c in range(c0, c1 + 1):
            if s.bricks[r, c]:
                return r, c
    return None


def render_frame(state: BreakoutState, variant: str) -> np.ndarray:
    """Pure render of a state under a variant skin, float32 (3, 84, 84) in [0,1]."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown BreakoutLite variant: {variant!r}")
    f = np.zeros((3, H, W), dtype=np.float32)
    # Walls.
    f[:, :WALL, :] = 0.45
    f[:, :, :WALL] = 0.45
    f[:, :, W - WALL:] = 0.45

    _draw_decoration(f, state, variant)

    # Bricks.
    for r in range(BRICK_ROWS):
        color = BRICK_ROW_COLORS[r]
        y = BRICK_Y0 + r * BRICK_H
        for c in range(BRICK_COLS):
            if state.bricks[r, c]:
                x = BRICK_X0 + c * BRICK_W
                f[:, y:y + BRICK_H - 1, x:x + BRICK_W - 1] = color[:, None, None]
    # Paddle.
    f[:, PADDLE_Y:PADDLE_Y + PADDLE_H, state.paddle_x:state.paddle_x + PADDLE_W] = 0.85
    # Ball.
    by, bx = state.ball_y, state.ball_x
    if by < H - BALL:
        f[:, by:by + BALL, bx:bx + BALL] = 1.0
    return f


def _draw_decoration(f: np.ndarray, state: BreakoutState, variant: str) -> None:
    if variant == "source":
        return
    if variant == "const-rect":
        x, y = RECT_POS
        f[:, y:y + BRICK_H - 1 + 2, x:x + BRICK_W - 1 + 2] = 0.95
    elif variant == "moving-square":
        idx = (state.global_step // 1000) % 3
        x, y = SQUARE_LOCATIONS[idx]
        f[:, y:y + SQUARE_SIZE, x:x + SQUARE_SIZE] = 0.9
    elif variant == "green-lines":
        for y, thickness in ((33, 2), (41, 3), (50, 2), (58, 3), (66, 2)):
            x0 = WALL + (y % 7)
            x1 = W - WALL - (y % 5)
            f[0, y:y + thickness, x0:x1] = 0.05
            f[1, y:y + thickness, x0:x1] = 0.85
            f[2, y:y + thickness, x0:x1] = 0.10
    elif variant == "diagonals":
        ys, xs = np.mgrid[WALL:H - 2, WALL:28]
        mask = (ys + xs) % 8 < 3
        region = f[:, WALL:H - 2, WALL:28]
        region[0][mask] = 0.75
        region[1][mask] = 0.75
        region[2][mask] = 0.30
