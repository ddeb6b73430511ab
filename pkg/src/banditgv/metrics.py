"""Regret, variation quantities, seed aggregation and scaling-law fits."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .adversary import LossSequence
from .records import RunRecord

log = logging.getLogger(__name__)

SURROGATE = "SURROGATE"


def static_regret(record: RunRecord, adversary: LossSequence, shrink: float = 0.0, center: bool = False) -> float:
    """Cumulative loss minus the best fixed point in (1 - shrink) X.

    The headline metric averages the losses of the query points in each
    round; ``center=True`` uses the centres w_t instead.
    """
    T = record.horizon
    if T == 0:
        return 0.0
    _, best = _best_fixed_prefix(adversary, T, shrink)
    if center:
        return float(np.sum(adversary.values(record.centers)) - best)
    return float(np.sum(record.average_losses()) - best)


def _best_fixed_prefix(adversary: LossSequence, T: int, shrink: float):
    if T == adversary.horizon:
        return adversary.best_fixed(shrink)
    from .adversary import _best_fixed

    return _best_fixed(adversary.curvature, adversary.linear[:T], adversary.offset[:T], adversary.domain, shrink)


def regret_pair(record: RunRecord, adversary: LossSequence) -> tuple[float, float]:
    """(two-point average regret over X, centre regret over the shrunk set)."""
    return (
        static_regret(record, adversary, 0.0, center=False),
        static_regret(record, adversary, record.shrink, center=True),
    )


def path_length(U) -> float:
    U = np.asarray(U, dtype=float)
    if U.shape[0] < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(U, axis=0), axis=1)))


def dynamic_regret(record: RunRecord, adversary: LossSequence, U, center: bool = False) -> float:
    U = np.asarray(U, dtype=float)
    if U.shape[0] != record.horizon:
        raise ValueError(f"comparator length {U.shape[0]} does not match horizon {record.horizon}")
    played = adversary.values(record.centers) if center else record.average_losses()
    return float(np.sum(played) - np.sum(adversary.values(U)))


def nonconsecutive_variation(record: RunRecord) -> float:
    return record.vbar


def mean_deviation(record: RunRecord, adversary: LossSequence) -> tuple[float, str]:
    """W_T and a label: exact for linear families, realised surrogate otherwise."""
    if adversary.is_linear:
        return adversary.mean_deviation(), "EXACT"
    T = record.horizon
    if T == 0:
        return 0.0, SURROGATE
    grads = record.centers @ adversary.curvature.T + adversary.linear[:T]
    dev = grads - grads.mean(axis=0)
    return float(np.sum(dev * dev)), SURROGATE


def small_loss(adversary: LossSequence, T: int | None = None) -> float:
    """F_T = min_X sum f_t - sum_t min_{X+} f_t."""
    T = adversary.horizon if T is None else T
    if T == 0:
        return 0.0
    _, best = _best_fixed_prefix(adversary, T, 0.0)
    return float(best - np.sum(adversary.per_round_mins()[:T]))


def gradient_variation(adversary: LossSequence, T: int | None = None) -> float:
    T = adversary.horizon if T is None else T
    if T < 2:
        return 0.0
    diff = np.diff(adversary.linear[:T], axis=0)
    return float(np.sum(diff * diff))


def summarize(record: RunRecord, adversary: LossSequence) -> dict:
    T = record.horizon
    reg_avg, reg_center = regret_pair(record, adversary)
    return {
        "regret_avg": reg_avg,
        "regret_center": reg_center,
        "VT": gradient_variation(adversary, T),
        "VbarT": record.vbar,
        "FT": small_loss(adversary, T),
    }


def aggregate(values) -> tuple[float, float]:
    """Mean and standard error across seeds."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return float("nan"), float("nan")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    half_width: float
    intercept: float
    used: int


def slope_fit(points, confidence: float = 0.95) -> SlopeFit:
    """Least-squares slope of log(regret) against log(T).

    Non-positive regrets cannot be logged; they are dropped with a warning.
    """
    pts = [(float(T), float(r)) for T, r in points]
    kept = [(T, r) for T, r in pts if r > 0 and T > 0]
    if len(kept) < len(pts):
        log.warning("slope_fit: dropped %d non-positive points", len(pts) - len(kept))
    if len(kept) < 3:
        raise ValueError("slope_fit needs at least three positive points")
    x = np.log([T for T, _ in kept])
    y = np.log([r for _, r in kept])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    n = len(kept)
    dof = n - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = np.sqrt(s2 / sxx)
    q = stats.t.ppf(0.5 + confidence / 2.0, dof) if dof > 0 else np.inf
    return SlopeFit(slope, float(q * se), intercept, n)
