"""Optimistic online gradient descent and its step-size schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .geometry import Domain, project_kernel


class ConfigError(ValueError):
    """Invalid algorithm configuration."""


ADAPTIVE, INVERSE_LINEAR, FIXED = 0, 1, 2


@dataclass(frozen=True)
class AdaptiveSqrt:
    """eta_t = numerator / sqrt(offset + Vbar_{t-1})."""

    numerator: float
    offset: float

    def encode(self):
        return ADAPTIVE, float(self.numerator), float(self.offset)


@dataclass(frozen=True)
class InverseLinear:
    """eta_t = scale / (lam * t)."""

    lam: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("InverseLinear schedule needs lam > 0")

    def encode(self):
        return INVERSE_LINEAR, float(self.scale), float(self.lam)


@dataclass(frozen=True)
class Fixed:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError("fixed step size must be positive")

    def encode(self):
        return FIXED, float(self.eta), 0.0


def convex_gv_schedule(d: int, R: float, L: float, T: int) -> AdaptiveSqrt:
    """Step size for convex functions with gradient-variation adaptivity."""
    return AdaptiveSqrt(R, 1152.0 * d**3 * R**4 * L**2 * math.log(max(T, 2)))


def variance_schedule(d: int, R: float, numerator_scale: float = 1.0) -> AdaptiveSqrt:
    """eta_t = scale * R / sqrt(d^2 + Vbar_{t-1}); scale 2 for ensemble bases."""
    return AdaptiveSqrt(numerator_scale * R, float(d * d))


@jit
def eta_kernel(kind, a, b, t, vbar_prev):
    if kind == 0:
        return a / np.sqrt(b + vbar_prev)
    if kind == 1:
        return a / (b * t)
    return a


def eta(schedule, t: int, vbar_prev: float) -> float:
    if t < 1:
        raise ConfigError("rounds are numbered from 1")
    if vbar_prev < 0:
        raise ConfigError("accumulated variation cannot be negative")
    return float(eta_kernel(*schedule.encode(), float(t), float(vbar_prev)))


@jit
def oogd_kernel(w_hat, g, gtilde_next, eta_t, eta_next, is_ball, radius, lower, upper, shrink):
    """Returns (w_hat_{t+1}, w_{t+1})."""
    d = w_hat.shape[0]
    y = np.empty(d)
    for k in range(d):
        y[k] = w_hat[k] - eta_t * g[k]
    new_hat = project_kernel(y, is_ball, radius, lower, upper, shrink)
    for k in range(d):
        y[k] = new_hat[k] - eta_next * gtilde_next[k]
    return new_hat, project_kernel(y, is_ball, radius, lower, upper, shrink)


@dataclass
class OogdState:
    w_hat: np.ndarray
    w: np.ndarray
    t: int = 1
    vbar: float = 0.0

    @classmethod
    def create(cls, domain: Domain, shrink: float) -> "OogdState":
        start = project_kernel(np.zeros(domain.dim), *domain.kernel_args(), shrink)
        return cls(start.copy(), start.copy())


def oogd_step(state: OogdState, g, gtilde_now, gtilde_next, eta_t, eta_next, domain: Domain, shrink: float) -> OogdState:
    """Advance one round; ``gtilde_now`` is the optimism the estimate was built against."""
    g = np.asarray(g, dtype=float)
    hat, w = oogd_kernel(
        state.w_hat, g, np.asarray(gtilde_next, dtype=float), float(eta_t), float(eta_next), *domain.kernel_args(), float(shrink)
    )
    innov = g - np.asarray(gtilde_now, dtype=float)
    return OogdState(hat, w, state.t + 1, state.vbar + float(innov @ innov))
