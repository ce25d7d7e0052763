"""Run configuration: a closed key schema mirroring the hyperparameter tables,
a flat key=value file format, and command-line overrides (flag wins)."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError

# key -> (type, default). Keys keep the hyperparameter tables' row names.
SCHEMA: dict[str, tuple[type, object]] = {
    "game": (str, "breakout"),
    "variant": (str, "source"),
    "level": (int, 1),
    "max steps": (int, 10_000),
    "seed": (int, 0),
    "# actor learners": (int, 8),
    "discount rate": (float, 0.99),
    "step-returns": (int, 20),
    "entropy regularization weight": (float, 0.01),
    "RMSprop learning rate": (float, 0.0007),
    "Adam learning rate": (float, 0.0005),
    "SGD learning rate": (float, 0.0007),
    "SGD momentum": (float, 0.9),
    "updates": (int, 1000),
    "metrics every": (int, 50),
    "eval every": (int, 1000),
    "eval episodes": (int, 10),
    "episodes": (int, 10),
    "mode": (str, "deterministic"),
    "frames": (int, 5000),
    "gan iterations": (int, 20_000),
    "checkpoint interval": (int, 1000),
    "lambda cyc": (float, 10.0),
    "sharing": (str, "shared-inner"),
    "init": (str, "xavier"),
    "trajectories": (int, 5),
    "beta_1": (float, 0.75),
    "beta_2": (float, 0.6),
    "Supervised_Iterations": (int, 500),
    "b": (int, 4),
    "op_interval": (int, 100),
    "setting": (str, "full-ft"),
}


def _coerce(key: str, raw: object):
    typ, _ = SCHEMA[key]
    if isinstance(raw, typ):
        return raw.strip() if typ is str else raw
    try:
        return typ(str(raw).strip())
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r} as {typ.__name__}") from exc


def defaults() -> dict:
    return {key: default for key, (_, default) in SCHEMA.items()}


def parse_config_file(path: str | Path) -> dict:
    """Parse a flat `key = value` file; any key outside the schema aborts.

    Comment lines start with ';' ('#' would collide with the literal
    "# actor learners" key).
    """
    out: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then file values, then overrides (e.g. from command line)."""
    cfg = defaults()
    if path is not None:
        cfg.update(parse_config_file(path))
    for key, value in (overrides or {}).items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _coerce(key, value)
    return cfg
