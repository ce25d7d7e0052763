"""Differentiable ops, parameter initialization, and optimizers.

Torch supplies tensors and reverse-mode gradients; this module pins down the
fixed operator set used by the rest of the package, the three initialization
schemes, frozen-parameter bookkeeping, and the optimizer hyperparameter
defaults. Analytic gradients are cross-checked against a finite-difference
oracle in the test suite.
"""

from __future__ import annotations

import re

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ShapeMismatchError, NumericalFailureError, StateCorruptionError

# Fixed operator set. Each entry maps a name to (fn, arity-description) and is
# exercised by the finite-difference gradient suite. Networks elsewhere in the
# package compose exactly these operators.
OPERATORS = {
    "dense": lambda x, w, b: F.linear(x, w, b),
    "conv2d_s1": lambda x, w, b: F.conv2d(x, w, b, stride=1, padding=1),
    "conv2d_s2": lambda x, w, b: F.conv2d(x, w, b, stride=2, padding=1),
    "conv_transpose2d_s2": lambda x, w, b: F.conv_transpose2d(x, w, b, stride=2, padding=1, output_padding=1),
    "relu": F.relu,
    "leaky_relu": lambda x: F.leaky_relu(x, 0.2),
    "tanh": torch.tanh,
    "sigmoid": torch.sigmoid,
    "softmax": lambda x: F.softmax(x, dim=-1),
    "mean": torch.mean,
    "sum": torch.sum,
    "add": torch.add,
    "mul": torch.mul,
    "sub": torch.sub,
}

RMSPROP_DEFAULTS = {"lr": 7e-4, "alpha": 0.99, "eps": 1e-5}
SGD_MOMENTUM_DEFAULTS = {"lr": 7e-4, "momentum": 0.9}
ADAM_DEFAULTS = {"lr": 1e-4, "betas": (0.9, 0.999), "eps": 1e-8}

_CONSTANT_RE = re.compile(r"^constant\((?P<c>[-+0-9.eE]+)\)$")


def _xavier_(tensor: torch.Tensor, gen: torch.Generator) -> None:
    fan_in, fan_out = nn.init._calculate_fan_in_and_fan_out(tensor)
    std = (2.0 / (fan_in + fan_out)) ** 0.5
    with torch.no_grad():
        tensor.normal_(0.0, std, generator=gen)


def _orthogonal_(tensor: torch.Tensor, gen: torch.Generator) -> None:
    rows = tensor.shape[0]
    cols = tensor.numel() // rows
    flat = torch.randn(rows, cols, generator=gen, dtype=torch.float64)
    if rows < cols:
        flat.t_()
    q, r = torch.linalg.qr(flat)
    q *= torch.sign(torch.diagonal(r))  # make the decomposition unique
    if rows < cols:
        q.t_()
    with torch.no_grad():
        tensor.copy_(q.reshape(tensor.shape).to(tensor.dtype))


def init_tensor_(tensor: torch.Tensor, scheme: str, gen: torch.Generator) -> None:
    """Initialize one weight tensor in place.

    scheme is one of "xavier", "orthogonal", or "constant(c)". Bias vectors
    (rank 1) are zeroed under xavier/orthogonal since fan-based schemes are
    undefined for them.
    """
    m = _CONSTANT_RE.match(scheme)
    if m:
        with torch.no_grad():
            tensor.fill_(float(m.group("c")))
        return
    if tensor.dim() < 2:
        with torch.no_grad():
            tensor.zero_()
        return
    if scheme == "xavier":
        _xavier_(tensor, gen)
    elif scheme == "orthogonal":
        _orthogonal_(tensor, gen)
    else:
        raise ValueError(f"unknown init scheme: {scheme!r}")


def apply_init(module: nn.Module, scheme: str, seed: int) -> nn.Module:
    """Deterministically initialize every parameter of a module in name order."""
    gen = torch.Generator().manual_seed(seed)
    for _, param in sorted(module.named_parameters(), key=lambda kv: kv[0]):
        init_tensor_(param, scheme, gen)
    return module


def build_network(layers: list[dict], init: str, seed: int) -> nn.Sequential:
    """Build an nn.Sequential from a layer-descriptor list.

    Descriptors: {"kind": "dense", "in": i, "out": o},
    {"kind": "conv", "in": c, "out": c2, "kernel": k, "stride": s},
    {"kind": "flatten"}, or {"kind": <activation name>}.
    Raises ShapeMismatchError if the channel/feature chain does not line up.
    """
    mods: list[nn.Module] = []
    prev: int | None = None
    for spec in layers:
        kind = spec["kind"]
        if kind == "dense":
            if prev is not None and spec["in"] != prev:
                raise ShapeMismatchError(
                    f"dense layer expects {spec['in']} inputs but previous layer yields {prev}")
            mods.append(nn.Linear(spec["in"], spec["out"]))
            prev = spec["out"]
        elif kind == "conv":
            if prev is not None and spec["in"] != prev:
                raise ShapeMismatchError(
                    f"conv layer expects {spec['in']} channels but previous layer yields {prev}")
            mods.append(nn.Conv2d(spec["in"], spec["out"], spec["kernel"], spec.get("stride", 1)))
            prev = spec["out"]
        elif kind == "flatten":
            mods.append(nn.Flatten())
            prev = None  # spatial extent unknown here; dense chain restarts
        elif kind == "relu":
            mods.append(nn.ReLU())
        elif kind == "leaky_relu":
            mods.append(nn.LeakyReLU(0.2))
        elif kind == "tanh":
            mods.append(nn.Tanh())
        elif kind == "sigmoid":
            mods.append(nn.Sigmoid())
        else:
            raise ValueError(f"unknown layer kind: {kind!r}")
    net = nn.Sequential(*mods)
    apply_init(net, init, seed)
    return net


def freeze_(module: nn.Module, names: list[str]) -> None:
    """Mark the named parameters frozen; optimizer steps will never touch them."""
    known = dict(module.named_parameters())
    for name in names:
        if name not in known:
            raise KeyError(f"no parameter named {name!r}")
        known[name].requires_grad_(False)


def frozen_names(module: nn.Module) -> list[str]:
    return [n for n, p in module.named_parameters() if not p.requires_grad]


def trainable(module: nn.Module):
    return [p for p in module.parameters() if p.requires_grad]


def make_optimizer(kind: str, module_or_params, **overrides) -> torch.optim.Optimizer:
    """Create an optimizer over the non-frozen parameters only."""
    if isinstance(module_or_params, nn.Module):
        params = trainable(module_or_params)
    else:
        params = [p for p in module_or_params if p.requires_grad]
    if kind == "rmsprop":
        hp = {**RMSPROP_DEFAULTS, **overrides}
        return torch.optim.RMSprop(params, **hp)
    if kind == "sgd-momentum":
        hp = {**SGD_MOMENTUM_DEFAULTS, **overrides}
        return torch.optim.SGD(params, **hp)
    if kind == "adam":
        hp = {**ADAM_DEFAULTS, **overrides}
        return torch.optim.Adam(params, **hp)
    raise ValueError(f"unknown optimizer kind: {kind!r}")


def load_optimizer_state(opt: torch.optim.Optimizer, state_dict: dict) -> None:
    """Restore optimizer state, verifying accumulator shapes."""
    own = [p for group in opt.param_groups for p in group["params"]]
    saved = state_dict.get("state", {})
    for idx, param in enumerate(own):
        if idx not in saved:
            continue
        for key, value in saved[idx].items():
            if torch.is_tensor(value) and value.shape != param.shape:
                raise StateCorruptionError(
                    f"accumulator {key!r} has shape {tuple(value.shape)}, "
                    f"parameter has {tuple(param.shape)}")
    try:
        opt.load_state_dict(state_dict)
    except (ValueError, KeyError) as exc:
        raise StateCorruptionError(str(exc)) from exc


def check_finite(value: torch.Tensor, what: str, tensor_name: str | None = None) -> torch.Tensor:
    if not torch.isfinite(value).all():
        raise NumericalFailureError(f"non-finite {what}", tensor_name=tensor_name)
    return value


def loss_and_grads(module: nn.Module, loss: torch.Tensor) -> dict[str, torch.Tensor]:
    """Backprop a scalar loss; return gradients for the non-frozen parameters."""
    check_finite(loss, "loss")
    module.zero_grad(set_to_none=True)
    loss.backward()
    grads = {}
    for name, param in module.named_parameters():
        if param.requires_grad:
            grad = param.grad if param.grad is not None else torch.zeros_like(param)
            check_finite(grad, "gradient", tensor_name=name)
            grads[name] = grad.detach().clone()
    return grads
