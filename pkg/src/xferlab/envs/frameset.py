"""RLGF frame-dataset files: the on-disk format consumed by translator training.

Layout (little-endian): magic "RLGF", version u32, count u32, channels u8,
height u16, width u16, then `count` frames of channels*height*width bytes,
each byte = round(pixel * 255).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptCheckpointError

MAGIC = b"RLGF"
VERSION = 1
_HEADER = struct.Struct("<4sIIBHH")


def write_frames(path: str | Path, frames: list[np.ndarray] | np.ndarray) -> None:
    frames = np.asarray(frames, dtype=np.float32)
    if frames.ndim != 4:
        raise ValueError(f"expected (count, channels, h, w), got shape {frames.shape}")
    count, channels, h, w = frames.shape
    data = np.rint(frames * 255.0).clip(0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, count, channels, h, w))
        fh.write(data.tobytes())


def read_frames(path: str | Path) -> np.ndarray:
    """Load a dataset back as float32 (count, channels, h, w) in [0,1]."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptCheckpointError(f"{path}: truncated header")
    magic, version, count, channels, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CorruptCheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorruptCheckpointError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    expected = count * channels * h * w
    if len(body) != expected:
        raise CorruptCheckpointError(f"{path}: expected {expected} body bytes, got {len(body)}")
    data = np.frombuffer(body, dtype=np.uint8).reshape(count, channels, h, w)
    return data.astype(np.float32) / 255.0
