"""Frame preprocessing: luminance grayscale, nearest-neighbor resize, stacking."""

from __future__ import annotations

import numpy as np

LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float32)
STACK = 4
OBS_H = OBS_W = 84


def to_gray(frame: np.ndarray) -> np.ndarray:
    """RGB (3, H, W) in [0,1] -> grayscale (H, W)."""
    return np.einsum("c,chw->hw", LUMA, frame.astype(np.float32, copy=False))


def resize_nn(img: np.ndarray, h: int, w: int) -> np.ndarray:
    """Nearest-neighbor resize of a (H, W) image; identity when sizes match."""
    src_h, src_w = img.shape
    if (src_h, src_w) == (h, w):
        return img
    ys = (np.arange(h) * src_h // h).clip(max=src_h - 1)
    xs = (np.arange(w) * src_w // w).clip(max=src_w - 1)
    return img[np.ix_(ys, xs)]


def preprocess(history: list[np.ndarray], stack: int = STACK,
               h: int = OBS_H, w: int = OBS_W) -> np.ndarray:
    """Last `stack` RGB frames -> observation (stack, h, w), newest last.

    Histories shorter than `stack` are padded by repeating the oldest frame.
    """
    if not history:
        raise ValueError("history must hold at least one frame")
    frames = list(history[-stack:])
    while len(frames) < stack:
        frames.insert(0, frames[0])
    return np.stack([resize_nn(to_gray(f), h, w) for f in frames])


class FrameHistory:
    """Rolling frame window that yields stacked observations."""

    def __init__(self, stack: int = STACK):
        self.stack = stack
        self._frames: list[np.ndarray] = []

    def reset(self, frame: np.ndarray) -> np.ndarray:
        self._frames = [frame]
        return self.observation()

    def push(self, frame: np.ndarray) -> np.ndarray:
        self._frames.append(frame)
        if len(self._frames) > self.stack:
            del self._frames[0]
        return self.observation()

    def observation(self) -> np.ndarray:
        return preprocess(self._frames, stack=self.stack)
