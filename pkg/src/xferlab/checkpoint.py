"""RLGN checkpoint container: named f32 tensors plus a JSON metadata block.

Layout (little-endian): magic "RLGN", version u32, tensor count u32, then per
tensor: name length u16, UTF-8 name, rank u8, dims u32 each, f32 payload.
A trailing block (length u32 + UTF-8 JSON) carries flags such as frozen
parameter names and the translator sharing mode.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from .errors import CorruptCheckpointError

MAGIC = b"RLGN"
VERSION = 1


def save_tensors(path: str | Path, tensors: dict, meta: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(tensors)))
        for name, tensor in tensors.items():
            arr = np.ascontiguousarray(
                tensor.detach().numpy() if torch.is_tensor(tensor) else tensor,
                dtype=np.float32)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes())
        blob = json.dumps(meta or {}).encode("utf-8")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)


def load_tensors(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    raw = Path(path).read_bytes()
    view = memoryview(raw)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(raw):
            raise CorruptCheckpointError(f"{path}: truncated at byte {pos}")
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    if bytes(take(4)) != MAGIC:
        raise CorruptCheckpointError(f"{path}: bad magic")
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise CorruptCheckpointError(f"{path}: unsupported version {version}")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{rank}I", take(4 * rank)) if rank else ()
        numel = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(take(4 * numel), dtype="<f4").reshape(shape).copy()
        tensors[name] = data
    (meta_len,) = struct.unpack("<I", take(4))
    meta = json.loads(bytes(take(meta_len)).decode("utf-8"))
    if pos != len(raw):
        raise CorruptCheckpointError(f"{path}: {len(raw) - pos} trailing bytes")
    return tensors, meta


def save_module(path: str | Path, module: torch.nn.Module, meta: dict | None = None) -> None:
    """Save a module's parameters and buffers with its frozen-name flags."""
    meta = dict(meta or {})
    meta.setdefault("frozen", [n for n, p in module.named_parameters() if not p.requires_grad])
    save_tensors(path, dict(module.state_dict()), meta)


def load_into_module(path: str | Path, module: torch.nn.Module) -> dict:
    tensors, meta = load_tensors(path)
    state = {k: torch.from_numpy(v) for k, v in tensors.items()}
    module.load_state_dict(state)
    for name, param in module.named_parameters():
        param.requires_grad_(name not in set(meta.get("frozen", ())))
    return meta
