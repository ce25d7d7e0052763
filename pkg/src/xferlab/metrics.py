"""Training metrics records and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

COLUMNS = ("wall_time_s", "frames", "updates", "mean_reward", "std_reward", "episodes")


@dataclass
class MetricsRecord:
    wall_time_s: float
    frames: int
    updates: int
    mean_reward: float
    std_reward: float
    episodes: int


def write_metrics(records: list[MetricsRecord] | tuple, path: str | Path) -> None:
    """Write records as CSV with one header row, in MetricsRecord column order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow([getattr(rec, col) for col in COLUMNS])


class MetricsWriter:
    """Streaming CSV writer; header is emitted once on first open."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(COLUMNS)
        self._fh.flush()

    def write(self, rec: MetricsRecord) -> None:
        self._writer.writerow([getattr(rec, col) for col in COLUMNS])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def read_metrics(path: str | Path) -> list[MetricsRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(MetricsRecord(
                wall_time_s=float(row["wall_time_s"]),
                frames=int(row["frames"]),
                updates=int(row["updates"]),
                mean_reward=float(row["mean_reward"]),
                std_reward=float(row["std_reward"]),
                episodes=int(row["episodes"]),
            ))
    return out
