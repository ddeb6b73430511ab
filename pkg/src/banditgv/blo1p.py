"""One-point bandit linear optimisation over boxes.

The learner runs FTRL with the log-barrier

    R(w) = -sum_i [log(w_i - a_i) + log(b_i - w_i)]

and explores along one barrier eigen-direction per round:
x_t = w_t + eps * lam_i^{-1/2} e_i.  Two buffers per coordinate remember the
last value observed with each sign, which gives both the optimism vector and
the baseline subtracted from the new observation.

The FTRL minimiser separates across coordinates.  Coordinate i solves the
scalar equation

    F(x) = eta * (S_i + c_i * sqrt(f''(x))) + f'(x) = 0,

with f'(x) = 1/(b-x) - 1/(x-a), f''(x) = (x-a)^-2 + (b-x)^-2 and
c_i = (r+_i - r-_i) / 2.  F is strictly increasing whenever |eta c_i| < 1,
so bisection finds the unique root.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from ._accel import jit
from .adversary import LossSequence, value_kernel
from .geometry import Domain, InputError, Rng
from .oogd import ConfigError
from .records import RunRecord, empty_record

log = logging.getLogger(__name__)

MAX_BISECTION = 200


class PreconditionError(ValueError):
    """|eta * c| >= 1: the coordinate equation may have several roots."""


class NumericError(RuntimeError):
    pass


@jit
def barrier_eigen_kernel(w, a, b):
    return 1.0 / ((b - w) * (b - w)) + 1.0 / ((w - a) * (w - a))


def barrier_eigen(w: float, a: float, b: float) -> float:
    if not a < w < b:
        raise InputError(f"{w} is not strictly inside ({a}, {b})")
    return float(barrier_eigen_kernel(float(w), float(a), float(b)))


@jit
def stationarity(x, S, c, eta, a, b):
    da = x - a
    db = b - x
    return eta * (S + c * np.sqrt(1.0 / (da * da) + 1.0 / (db * db))) + 1.0 / db - 1.0 / da


@jit
def solve_kernel(S, c, eta, a, b, tol, max_iter):
    """Bisection on (a, b); returns (root, status) with status 1 on non-convergence."""
    lo = a
    hi = b
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # interval is a single ulp wide; keep the interior end
            return (lo if lo > a else hi), 0
        F = stationarity(mid, S, c, eta, a, b)
        if abs(F) <= tol:
            return mid, 0
        if F > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi), 0
    return 0.5 * (lo + hi), 1


def solve_coordinate(S: float, c: float, eta: float, a: float, b: float, tol: float) -> float:
    if not a < b:
        raise InputError("need a < b")
    if abs(eta * c) >= 1.0:
        raise PreconditionError(f"|eta*c| = {abs(eta * c):.6g} >= 1")
    x, status = solve_kernel(float(S), float(c), float(eta), float(a), float(b), float(tol), MAX_BISECTION)
    if status:
        raise NumericError("bisection did not converge within the iteration cap")
    return float(x)


@jit
def play_kernel(w, lower, upper, i, eps):
    x = w.copy()
    lam = barrier_eigen_kernel(w[i], lower[i], upper[i])
    x[i] += eps / np.sqrt(lam)
    # the exact offset is strictly inside but can round onto the face when
    # w_i sits within a few ulps of it
    if x[i] >= upper[i]:
        x[i] = np.nextafter(upper[i], lower[i])
    elif x[i] <= lower[i]:
        x[i] = np.nextafter(lower[i], upper[i])
    return x


@jit
def optimism_kernel(w, rp, rm, lower, upper):
    d = w.shape[0]
    out = np.empty(d)
    for k in range(d):
        out[k] = 0.5 * np.sqrt(barrier_eigen_kernel(w[k], lower[k], upper[k])) * (rp[k] - rm[k])
    return out


@jit
def update_kernel(w, gsum, rp, rm, lower, upper, eta, i, eps, v, tol, max_iter):
    """Form g_t, overwrite the buffer, accumulate, and solve for w_{t+1}.

    Returns (w_next, g, innovation, halvings, status).  When |eta c_j| >= 1
    the step size is halved for that coordinate's solve only.
    """
    d = w.shape[0]
    g = optimism_kernel(w, rp, rm, lower, upper)
    sl = np.sqrt(barrier_eigen_kernel(w[i], lower[i], upper[i]))
    if eps > 0:
        z = rp[i]
        rp[i] = v
    else:
        z = rm[i]
        rm[i] = v
    innov = d * (v - z) * eps * sl
    g[i] += innov
    for k in range(d):
        gsum[k] += g[k]
    w_next = np.empty(d)
    halvings = 0
    status = 0
    for k in range(d):
        c = 0.5 * (rp[k] - rm[k])
        e = eta
        while abs(e * c) >= 1.0:
            e *= 0.5
            halvings += 1
        x, st = solve_kernel(gsum[k], c, e, lower[k], upper[k], tol, max_iter)
        w_next[k] = x
        if st != 0:
            status = st
    return w_next, g, innov, halvings, status


@dataclass
class BarrierState:
    w: np.ndarray
    gsum: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def create(cls, domain: Domain) -> "BarrierState":
        if domain.is_ball:
            raise InputError("the one-point learner needs a box domain")
        lo = np.array(domain.lower, dtype=float)
        hi = np.array(domain.upper, dtype=float)
        if np.any(lo > 0) or np.any(hi < 0):
            raise InputError("box must satisfy lower <= 0 <= upper")
        # barrier minimiser = box midpoint (the origin for symmetric boxes)
        d = lo.size
        return cls(0.5 * (lo + hi), np.zeros(d), np.zeros(d), np.zeros(d), lo, hi)

    @property
    def optimism(self) -> np.ndarray:
        return optimism_kernel(self.w, self.r_plus, self.r_minus, self.lower, self.upper)


def play_action(state: BarrierState, i: int, eps: int) -> np.ndarray:
    return play_kernel(state.w, state.lower, state.upper, int(i), float(eps))


def optimism(state: BarrierState) -> np.ndarray:
    return state.optimism


def estimate(state: BarrierState, i: int, eps: int, v: float) -> np.ndarray:
    """g_t for the observed value; updates buffers and the running sum only."""
    d = state.w.size
    g = state.optimism
    sl = math.sqrt(barrier_eigen(state.w[i], state.lower[i], state.upper[i]))
    buf = state.r_plus if eps > 0 else state.r_minus
    z = buf[i]
    g[i] += d * (v - z) * eps * sl
    buf[i] = v
    state.gsum += g
    return g


def step(state: BarrierState, eta: float, i: int, eps: int, v: float, tol: float) -> tuple[np.ndarray, int]:
    """Full learner update after observing ``v``; returns (g_t, halvings)."""
    w_next, g, _, halvings, status = update_kernel(
        state.w, state.gsum, state.r_plus, state.r_minus, state.lower, state.upper,
        float(eta), int(i), float(eps), float(v), float(tol), MAX_BISECTION,
    )
    if status:
        raise NumericError("bisection did not converge within the iteration cap")
    state.w = w_next
    return g, halvings


def default_eta(R: float, G: float, d: int, VT: float, T: int) -> float:
    """eta = 1/(8 R G d^2 sqrt(V_T ln T)); V_T is floored at 1 so V_T = 0 stays finite."""
    return 1.0 / (8.0 * R * G * d * d * math.sqrt(max(VT, 1.0) * math.log(max(T, 2))))


@jit
def one_point_kernel(A, B, C, lower, upper, coords, signs, eta, tol, max_iter):
    T = coords.shape[0]
    d = lower.shape[0]
    centers = np.empty((T, d))
    plays = np.empty((T, 1, d))
    values = np.empty((T, 1))
    innov_sq = np.empty(T)
    w = 0.5 * (lower + upper)
    gsum = np.zeros(d)
    rp = np.zeros(d)
    rm = np.zeros(d)
    halvings = 0
    status = 0
    outside = 0
    for t in range(T):
        i = coords[t]
        eps = signs[t]
        x = play_kernel(w, lower, upper, i, eps)
        for k in range(d):
            if not (lower[k] < x[k] < upper[k]) or not (lower[k] < w[k] < upper[k]):
                outside += 1
                break
        v = value_kernel(A, B, C, t, x)
        centers[t] = w
        plays[t, 0] = x
        values[t, 0] = v
        w, g, innov, h, st = update_kernel(w, gsum, rp, rm, lower, upper, eta, i, eps, v, tol, max_iter)
        innov_sq[t] = innov * innov
        halvings += h
        if st != 0:
            status = st
    return centers, plays, values, innov_sq, halvings, status, outside


def run_one_point(
    adversary: LossSequence,
    T: int | None = None,
    seed: int = 0,
    overrides: dict | None = None,
    summarize: bool = True,
) -> RunRecord:
    overrides = overrides or {}
    T = adversary.horizon if T is None else int(T)
    if T < 0 or T > adversary.horizon:
        raise ConfigError(f"T={T} outside 0..{adversary.horizon}")
    if not adversary.is_linear:
        raise ConfigError("the one-point learner handles linear losses only")
    domain = adversary.domain
    BarrierState.create(domain)  # validates the box
    d = domain.dim
    if "eta" in overrides:
        eta = float(overrides["eta"])
    else:
        VT = float(overrides.get("vt", metrics.gradient_variation(adversary, T)))
        eta = default_eta(domain.circumradius, adversary.G, d, VT, T)
    tol = float(overrides.get("tol", 1.0 / max(T, 1)))
    if T == 0:
        rec = empty_record("one_point", seed, d, 1)
        rec.summary = _summary(rec, adversary) if summarize else {}
        return rec
    rng = Rng(seed)
    coords = rng.coordinates(d, T)
    signs = rng.signs(T)
    bandit = adversary.bandit_view()
    lo = np.ascontiguousarray(domain.lower)
    hi = np.ascontiguousarray(domain.upper)
    centers, plays, values, innov_sq, halvings, status, outside = one_point_kernel(
        bandit.curvature, bandit.linear[:T], bandit.offset[:T], lo, hi, coords, signs, eta, tol, MAX_BISECTION
    )
    if status:
        raise NumericError("bisection did not converge within the iteration cap")
    if halvings:
        log.warning("step size halved %d times to keep |eta*c| < 1", halvings)
    rec = RunRecord(
        "one_point", int(seed), d, 0.0, 0.0, centers, plays, values, coords,
        values[:, 0].copy(), np.full(T, eta), innov_sq, signs=signs,
    )
    rec.extras = {"halvings": int(halvings), "outside": int(outside), "tol": tol}
    if summarize:
        rec.summary = _summary(rec, adversary)
    return rec


def _summary(rec: RunRecord, adversary: LossSequence) -> dict:
    T = rec.horizon
    return {
        "regret_avg": metrics.static_regret(rec, adversary, 0.0),
        "regret_center": metrics.static_regret(rec, adversary, 0.0, center=True),
        "VT": metrics.gradient_variation(adversary, T),
        "VbarT": rec.vbar,
        "FT": metrics.small_loss(adversary, T),
    }
