"""Bandit bilinear zero-sum games over boxes.

The x-player minimises and the y-player maximises f(x, y) = <x, A y>.  Each
runs the one-point log-barrier learner and sees only the scalar payoff; the
y-player is fed the negated payoff so both learners minimise.  A scripted
vertex opponent can replace the y-learner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import jit
from .adversary import sign_pattern
from .blo1p import MAX_BISECTION, NumericError, play_kernel, update_kernel
from .geometry import Domain, InputError, Rng
from .oogd import ConfigError


def operator_norm(A, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on A^T A."""
    A = np.asarray(A, dtype=float)
    if not np.any(A):
        return 0.0
    v = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    est = 0.0
    for _ in range(max_iter):
        u = A.T @ (A @ v)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            # start vector happened to lie in the null space
            v = np.random.Generator(np.random.PCG64(0)).standard_normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = u / nrm
        new = math.sqrt(nrm)
        if abs(new - est) <= tol * max(1.0, new):
            return new
        est = new
    return est


def _box_extreme(coef, lower, upper, maximise: bool) -> float:
    """max or min of <coef, z> over a box by endpoint selection."""
    if maximise:
        return float(np.sum(np.where(coef > 0, coef * upper, coef * lower)))
    return float(np.sum(np.where(coef > 0, coef * lower, coef * upper)))


def duality_gap(A, xbar, ybar, X: Domain, Y: Domain) -> float:
    A = np.asarray(A, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    ybar = np.asarray(ybar, dtype=float)
    if not X.contains(xbar) or not Y.contains(ybar):
        raise InputError("averaged strategies must lie in their boxes")
    hi = _box_extreme(A.T @ xbar, Y.lower, Y.upper, True)
    lo = _box_extreme(A @ ybar, X.lower, X.upper, False)
    return hi - lo


def honest_eta(m: int, n: int, T: int) -> float:
    return 1.0 / (8.0 * math.sqrt(math.log(max(T, 2))) * (m**3 + n**3))


def variation_eta(R_own: float, R_other: float, dim_own: int, V: float, m: int, n: int, T: int) -> float:
    """min of the variation-aware rate and the honest rate."""
    lnT = math.log(max(T, 2))
    first = math.inf if V <= 0 else 1.0 / (8.0 * R_own * R_other * dim_own**2 * math.sqrt(V * lnT))
    return min(first, honest_eta(m, n, T))


@dataclass
class GameConfig:
    A: np.ndarray
    X: Domain
    Y: Domain
    T: int
    seeds: list = field(default_factory=lambda: [0])
    eta_x: float | None = None
    eta_y: float | None = None
    opponent: str = "learner"  # or "scripted"
    script: str = "sqrt_walk"
    script_seed: int = 0
    tol: float | None = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        m, n = self.A.shape
        if self.X.is_ball or self.Y.is_ball:
            raise ConfigError("game strategy sets must be boxes")
        if self.X.dim != m or self.Y.dim != n:
            raise ConfigError(f"payoff is {m}x{n} but boxes have dims {self.X.dim}, {self.Y.dim}")
        if operator_norm(self.A) > 1.0 + 1e-8:
            raise ConfigError("payoff matrix must have operator norm at most 1")
        if self.opponent not in ("learner", "scripted"):
            raise ConfigError(f"unknown opponent {self.opponent!r}")


@dataclass
class GameRecord:
    seed: int
    xs: np.ndarray
    ys: np.ndarray
    payoffs: np.ndarray
    checkpoints: np.ndarray
    gaps: np.ndarray
    regret_x: np.ndarray
    regret_y: np.ndarray
    eta_x: float
    eta_y: float
    halvings: int = 0

    @property
    def xbar(self) -> np.ndarray:
        return self.xs.mean(axis=0)

    @property
    def ybar(self) -> np.ndarray:
        return self.ys.mean(axis=0)


def scripted_plays(cfg: GameConfig) -> np.ndarray:
    """Vertex sequence for the scripted y-player: upper corner when s_t > 0."""
    s = sign_pattern(cfg.T, cfg.script, cfg.script_seed)
    return np.where(s[:, None] > 0, cfg.Y.upper[None, :], cfg.Y.lower[None, :]).astype(float)


@jit
def game_kernel(A, xl, xu, yl, yu, cx, ex, cy, ey, eta_x, eta_y, tol, scripted, Yscript, max_iter):
    T = cx.shape[0]
    m = xl.shape[0]
    n = yl.shape[0]
    wx = 0.5 * (xl + xu)
    wy = 0.5 * (yl + yu)
    gx = np.zeros(m)
    rpx = np.zeros(m)
    rmx = np.zeros(m)
    gy = np.zeros(n)
    rpy = np.zeros(n)
    rmy = np.zeros(n)
    xs = np.empty((T, m))
    ys = np.empty((T, n))
    pay = np.empty(T)
    halvings = 0
    status = 0
    for t in range(T):
        x = play_kernel(wx, xl, xu, cx[t], ex[t])
        if scripted:
            y = Yscript[t].copy()
        else:
            y = play_kernel(wy, yl, yu, cy[t], ey[t])
        v = 0.0
        for r in range(m):
            acc = 0.0
            for c in range(n):
                acc += A[r, c] * y[c]
            v += x[r] * acc
        xs[t] = x
        ys[t] = y
        pay[t] = v
        wx, g, innov, h, st = update_kernel(wx, gx, rpx, rmx, xl, xu, eta_x, cx[t], ex[t], v, tol, max_iter)
        halvings += h
        if st != 0:
            status = st
        if not scripted:
            wy, g, innov, h, st = update_kernel(wy, gy, rpy, rmy, yl, yu, eta_y, cy[t], ey[t], -v, tol, max_iter)
            halvings += h
            if st != 0:
                status = st
    return xs, ys, pay, halvings, status


def checkpoints(T: int) -> np.ndarray:
    pts = [2**k for k in range(int(math.log2(T)) + 1)] if T >= 1 else []
    if T >= 1 and pts[-1] != T:
        pts.append(T)
    return np.asarray(pts, dtype=np.int64)


def run_game(cfg: GameConfig, seed: int) -> GameRecord:
    A = cfg.A
    m, n = A.shape
    T = cfg.T
    scripted = cfg.opponent == "scripted"
    Yscript = scripted_plays(cfg) if scripted else np.zeros((T, n))
    if cfg.eta_x is not None:
        eta_x = cfg.eta_x
    elif scripted:
        diff = np.diff(Yscript, axis=0) @ A.T
        Vx = float(np.sum(diff * diff))
        eta_x = variation_eta(cfg.X.diameter, cfg.Y.diameter, m, Vx, m, n, T)
    else:
        eta_x = honest_eta(m, n, T)
    eta_y = cfg.eta_y if cfg.eta_y is not None else honest_eta(m, n, T)
    tol = cfg.tol if cfg.tol is not None else 1.0 / max(T, 1)
    rng = Rng(seed)
    cx = rng.coordinates(m, T)
    ex = rng.signs(T)
    cy = rng.coordinates(n, T)
    ey = rng.signs(T)
    xl, xu = np.ascontiguousarray(cfg.X.lower), np.ascontiguousarray(cfg.X.upper)
    yl, yu = np.ascontiguousarray(cfg.Y.lower), np.ascontiguousarray(cfg.Y.upper)
    xs, ys, pay, halvings, status = game_kernel(
        A, xl, xu, yl, yu, cx, ex, cy, ey, float(eta_x), float(eta_y), float(tol), scripted, Yscript, MAX_BISECTION
    )
    if status:
        raise NumericError("bisection did not converge within the iteration cap")
    cps = checkpoints(T)
    Xc = np.cumsum(xs, axis=0)
    Yc = np.cumsum(ys, axis=0)
    Pc = np.cumsum(pay)
    gaps, rx, ry = [], [], []
    for c in cps:
        X_sum, Y_sum, P = Xc[c - 1], Yc[c - 1], Pc[c - 1]
        rx.append(P - _box_extreme(A @ Y_sum, xl, xu, False))
        ry.append(_box_extreme(A.T @ X_sum, yl, yu, True) - P)
        gaps.append(duality_gap(A, X_sum / c, Y_sum / c, cfg.X, cfg.Y))
    return GameRecord(int(seed), xs, ys, pay, cps, np.array(gaps), np.array(rx), np.array(ry), float(eta_x), float(eta_y), int(halvings))
