"""Two-point coordinate gradient estimator with an optimism buffer.

Each round one coordinate ``i`` is probed at ``w +/- delta e_i``.  The
directional value ``v`` replaces entry ``i`` of the buffer ``gtilde`` and the
estimate is ``g = d (v - gtilde[i]) e_i + gtilde`` (buffer taken before the
overwrite), so ``g - gtilde`` is supported on a single coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import jit
from .geometry import InputError


@dataclass
class TwoPointEstimatorState:
    optimism: np.ndarray
    delta: float
    last_sample: np.ndarray
    gap_log: list = field(default_factory=list)

    @classmethod
    def create(cls, d: int, delta: float) -> "TwoPointEstimatorState":
        if d < 1:
            raise InputError("d must be positive")
        if not delta > 0:
            raise InputError("delta must be positive")
        return cls(np.zeros(d), float(delta), np.zeros(d, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.optimism.size


def query_points(w, i: int, delta: float):
    w = np.asarray(w, dtype=float)
    xp = w.copy()
    xm = w.copy()
    xp[i] += delta
    xm[i] -= delta
    return xp, xm


def directional_value(f_plus: float, f_minus: float, delta: float) -> float:
    if not delta > 0:
        raise InputError("delta must be positive")
    return (f_plus - f_minus) / (2.0 * delta)


@jit
def estimate_kernel(gtilde, i, v):
    """Return (g, innovation) and overwrite ``gtilde[i]`` with ``v``."""
    d = gtilde.shape[0]
    innov = d * (v - gtilde[i])
    g = gtilde.copy()
    g[i] += innov
    gtilde[i] = v
    return g, innov


def update(state: TwoPointEstimatorState, t: int, i: int, v: float) -> np.ndarray:
    """One estimator step for round ``t`` (1-based) and coordinate ``i`` (0-based)."""
    if not 0 <= i < state.dim:
        raise InputError(f"coordinate {i} outside 0..{state.dim - 1}")
    g, _ = estimate_kernel(state.optimism, int(i), float(v))
    state.gap_log.append((int(t), int(i), int(t - state.last_sample[i])))
    state.last_sample[i] = t
    return g


@dataclass(frozen=True)
class RhoSummary:
    mean_rho: float
    se_rho: float
    mean_max_rho: float
    se_max_rho: float
    histogram: np.ndarray
    rounds: int


def rho_matrix(coords, d: int) -> np.ndarray:
    """rho[t, i] = tau2 - tau1 around round t (1-based rounds).

    tau1 is the last round before t that sampled i (0 if none) and tau2 the
    first round at or after t that samples i (T + 1 if none).
    """
    coords = np.asarray(coords, dtype=np.int64)
    T = coords.size
    rounds = np.arange(1, T + 1)
    rho = np.empty((T, d), dtype=np.int64)
    for i in range(d):
        hits = rounds[coords == i]
        before = np.concatenate(([0], hits))
        after = np.concatenate((hits, [T + 1]))
        # index of first hit >= t
        k = np.searchsorted(hits, rounds, side="left")
        rho[:, i] = after[k] - before[k]
    return rho


def rho_statistics(coords, d: int) -> RhoSummary | None:
    """Empirical E[rho] and E[max_i rho] from a coordinate sequence."""
    coords = np.asarray(coords)
    if coords.size == 0:
        return None
    rho = rho_matrix(coords, d)
    per_round = rho.mean(axis=1)
    mx = rho.max(axis=1)
    n = rho.shape[0]
    # per-round averages are the independent-ish unit for the standard error
    se = float(per_round.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    se_mx = float(mx.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    hist = np.bincount(rho.ravel())
    return RhoSummary(float(rho.mean()), se, float(mx.mean()), se_mx, hist, n)


@dataclass(frozen=True)
class CouponSummary:
    mean_first_hit: float
    mean_collection: float
    episodes: int


def coupon_statistics(coords, d: int) -> CouponSummary:
    """Split the stream into collection episodes.

    Each episode starts where the previous one completed and ends once every
    coordinate has appeared.  Within an episode the first-hit time of each
    coordinate is geometric with mean d and the episode length has mean
    d * H_d.
    """
    coords = np.asarray(coords, dtype=np.int64)
    first_hits, lengths = [], []
    start, T = 0, coords.size
    while start < T:
        seen = np.zeros(d, dtype=np.int64)
        count = 0
        t = start
        while t < T and count < d:
            c = coords[t]
            if seen[c] == 0:
                seen[c] = t - start + 1
                count += 1
            t += 1
        if count < d:
            break
        first_hits.extend(seen.tolist())
        lengths.append(t - start)
        start = t
    if not lengths:
        return CouponSummary(float("nan"), float("nan"), 0)
    return CouponSummary(float(np.mean(first_hits)), float(np.mean(lengths)), len(lengths))


def harmonic(d: int) -> float:
    return float(np.sum(1.0 / np.arange(1, d + 1)))
