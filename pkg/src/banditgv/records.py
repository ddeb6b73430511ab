"""Per-round traces shared by all runners."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunRecord:
    """Trace of one run.

    ``plays`` has shape (T, k, d) with k = 2 for two-point runs and k = 1 for
    one-point runs; ``values`` holds the matching observed losses.  Coordinates
    are 0-based internally and written 1-based to CSV.
    """

    algorithm: str
    seed: int
    dim: int
    shrink: float
    delta: float
    centers: np.ndarray
    plays: np.ndarray
    values: np.ndarray
    coords: np.ndarray
    v: np.ndarray
    eta: np.ndarray
    innov_sq: np.ndarray
    signs: np.ndarray | None = None
    directions: np.ndarray | None = None
    weights: np.ndarray | None = None
    extras: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    config_hash: str = ""

    @property
    def horizon(self) -> int:
        return self.centers.shape[0]

    @property
    def vbar(self) -> float:
        return float(np.sum(self.innov_sq))

    def average_losses(self) -> np.ndarray:
        return self.values.mean(axis=1) if self.horizon else np.zeros(0)


def empty_record(algorithm: str, seed: int, d: int, k: int, shrink: float = 0.0, delta: float = 0.0) -> RunRecord:
    return RunRecord(
        algorithm,
        int(seed),
        d,
        shrink,
        delta,
        np.zeros((0, d)),
        np.zeros((0, k, d)),
        np.zeros((0, k)),
        np.zeros(0, dtype=np.int64),
        np.zeros(0),
        np.zeros(0),
        np.zeros(0),
    )
