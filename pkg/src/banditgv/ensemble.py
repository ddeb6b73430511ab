"""Meta/base ensembles on top of the two-point learner.

Both ensembles share one estimator per round: a single coordinate is probed
around the combined centre w_t = sum_i p_i w_{t,i}, and the resulting
(g_t, gtilde_{t+1}) feeds every base learner.

* ``run_dynamic``: base learners are optimistic OGD with fixed step sizes
  from a geometric grid; an optimistic Hedge meta-learner mixes them using
  surrogate losses with a movement penalty.
* ``run_universal``: strongly convex bases (one per lam on a doubling grid)
  plus a convex and a linear base; an optimistic Adapt-ML-Prod meta-learner
  with per-expert learning rates mixes them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from ._accel import jit
from .adversary import LossSequence, value_kernel
from .bco2p import BoundViolation, _g_tolerance, exploration_parameters
from .estimator2p import estimate_kernel
from .geometry import Rng, project_kernel
from .oogd import ConfigError, oogd_kernel
from .records import RunRecord

log = logging.getLogger(__name__)


# -- pools -----------------------------------------------------------------


def pool_base(R: float, d: int, T: int) -> float:
    """Smallest grid step before capping; ln d is replaced by 1 when d = 1."""
    lnd = math.log(d) if d > 1 else 1.0
    return math.sqrt(R * R / (d**3 * T * lnd))


def pool_cap(R: float, L: float, d: int, T: int) -> float:
    return R / (16.0 * L * math.sqrt(d**3 * math.log(T)))


def dynamic_pool(R: float, L: float, d: int, T: int) -> list[float]:
    """Doubling grid of step sizes, capped; the cap is the last entry.

    When the base already exceeds the cap the pool is the single entry [cap].
    """
    if T < 2:
        raise ConfigError("dynamic pool needs T >= 2")
    cap = pool_cap(R, L, d, T)
    base = pool_base(R, d, T)
    etas = []
    k = 0
    while True:
        u = base * 2.0**k
        if u >= cap:
            etas.append(cap)
            return etas
        etas.append(u)
        k += 1


def sc_pool(T: int) -> list[float]:
    """{2^k / T : k = 0..ceil(log2 T)}."""
    if T < 2:
        raise ConfigError("strongly convex pool needs T >= 2")
    n = int(math.ceil(math.log2(T))) + 1
    return [2.0**k / T for k in range(n)]


# -- optimistic Hedge --------------------------------------------------------


@jit
def hedge_weights(cum_loss, m_next, eps):
    N = cum_loss.shape[0]
    s = np.empty(N)
    top = -np.inf
    for j in range(N):
        s[j] = -eps * (cum_loss[j] + m_next[j])
        if s[j] > top:
            top = s[j]
    tot = 0.0
    for j in range(N):
        s[j] = np.exp(s[j] - top)
        tot += s[j]
    for j in range(N):
        s[j] /= tot
    return s


@dataclass
class HedgeMeta:
    C0: float
    gamma: float
    p: np.ndarray
    cum_loss: np.ndarray
    optimism: np.ndarray
    sq_sum: float = 0.0
    eps: float = 0.0

    @classmethod
    def create(cls, N: int, C0: float, gamma: float = 0.0) -> "HedgeMeta":
        return cls(C0, gamma, np.full(N, 1.0 / N), np.zeros(N), np.zeros(N))

    def rate(self) -> float:
        N = self.p.size
        if N == 1:
            return 0.0
        return math.sqrt(math.log(N) / (self.C0**2 + self.sq_sum))


def hedge_update(meta: HedgeMeta, losses, m_next) -> np.ndarray:
    """Feed round-t losses and the next optimism; returns p_{t+1}.

    The learning rate uses the squared innovations of rounds before t.
    """
    losses = np.asarray(losses, dtype=float)
    m_next = np.asarray(m_next, dtype=float)
    meta.eps = meta.rate()
    meta.sq_sum += float(np.max(np.abs(losses - meta.optimism))) ** 2
    meta.cum_loss = meta.cum_loss + losses
    meta.optimism = m_next.copy()
    meta.p = hedge_weights(meta.cum_loss, m_next, meta.eps)
    return meta.p


# -- optimistic Adapt-ML-Prod -----------------------------------------------


@jit
def mlprod_potentials(logW, eps, sq, r, m_now, lnN):
    """In-place update of log-potentials, learning rates and square sums."""
    N = logW.shape[0]
    for j in range(N):
        dev = r[j] - m_now[j]
        sq[j] += dev * dev
        e_new = 0.125
        if sq[j] > 0.0:
            e_new = min(0.125, np.sqrt(lnN / sq[j]))
        e_old = eps[j]
        logW[j] = (e_new / e_old) * (logW[j] + e_old * r[j] - e_old * e_old * dev * dev)
        eps[j] = e_new


@jit
def mlprod_weights(logW, eps, m_next):
    N = logW.shape[0]
    s = np.empty(N)
    top = -np.inf
    for j in range(N):
        s[j] = np.log(eps[j]) + eps[j] * m_next[j] + logW[j]
        if s[j] > top:
            top = s[j]
    tot = 0.0
    for j in range(N):
        s[j] = np.exp(s[j] - top)
        tot += s[j]
    for j in range(N):
        s[j] /= tot
    return s


@dataclass
class MLProdMeta:
    log_w: np.ndarray
    eps: np.ndarray
    sq: np.ndarray
    p: np.ndarray

    @classmethod
    def create(cls, N: int) -> "MLProdMeta":
        return cls(np.full(N, -math.log(N)), np.full(N, 0.125), np.zeros(N), np.full(N, 1.0 / N))

    @property
    def potentials(self) -> np.ndarray:
        return np.exp(self.log_w)


def mlprod_update(meta: MLProdMeta, r, m_now, m_next) -> np.ndarray:
    N = meta.p.size
    mlprod_potentials(meta.log_w, meta.eps, meta.sq, np.asarray(r, float), np.asarray(m_now, float), math.log(N))
    meta.p = mlprod_weights(meta.log_w, meta.eps, np.asarray(m_next, float))
    return meta.p


@jit
def _mixture(z, inner, Wb, logW, eps, is_sc, scale):
    N = Wb.shape[0]
    m = np.zeros(N)
    for j in range(N):
        if not is_sc[j]:
            m[j] = (z - inner[j]) / scale
    p = mlprod_weights(logW, eps, m)
    return p, m


@jit
def _residual(z, gt, inner, Wb, logW, eps, is_sc, scale):
    p, m = _mixture(z, inner, Wb, logW, eps, is_sc, scale)
    s = 0.0
    for j in range(Wb.shape[0]):
        s += p[j] * inner[j]
    return z - s


@jit
def fixed_point_kernel(gt, Wb, logW, eps, is_sc, scale, bound, tol, z_prev):
    """Solve z = <gtilde, w(z)>; status 0 bisection, 1 damped fallback, 2 failed."""
    N = Wb.shape[0]
    d = Wb.shape[1]
    inner = np.empty(N)
    for j in range(N):
        s = 0.0
        for k in range(d):
            s += gt[k] * Wb[j, k]
        inner[j] = s
    lo = -bound
    hi = bound
    hlo = _residual(lo, gt, inner, Wb, logW, eps, is_sc, scale)
    hhi = _residual(hi, gt, inner, Wb, logW, eps, is_sc, scale)
    if hlo <= 0.0 <= hhi:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            h = _residual(mid, gt, inner, Wb, logW, eps, is_sc, scale)
            if abs(h) <= tol or hi - lo <= tol:
                return mid, 0
            if h > 0.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi), 0
    z = z_prev
    for _ in range(50):
        z = z - 0.5 * _residual(z, gt, inner, Wb, logW, eps, is_sc, scale)
    if abs(_residual(z, gt, inner, Wb, logW, eps, is_sc, scale)) <= tol:
        return z, 1
    return z_prev, 2


def universal_optimism_fixed_point(gtilde, base_iterates, meta: MLProdMeta, is_sc, scale: float, bound: float, tol: float, z_prev: float = 0.0):
    """Returns (z, m, p, status) for the next round's optimism."""
    gt = np.asarray(gtilde, float)
    Wb = np.ascontiguousarray(base_iterates, dtype=float)
    is_sc = np.asarray(is_sc, dtype=np.bool_)
    z, status = fixed_point_kernel(gt, Wb, meta.log_w, meta.eps, is_sc, float(scale), float(bound), float(tol), float(z_prev))
    inner = Wb @ gt
    p, m = _mixture(z, inner, Wb, meta.log_w, meta.eps, is_sc, float(scale))
    if status == 2:
        log.warning("optimism fixed point not located; reusing previous z")
    return float(z), m, p, int(status)


# -- runners -----------------------------------------------------------------


@jit
def dynamic_kernel(A, B, C, is_ball, radius, lower, upper, shrink, delta, coords, etas, C0, gamma, lnN, gbound):
    T = coords.shape[0]
    d = A.shape[0]
    N = etas.shape[0]
    start = project_kernel(np.zeros(d), is_ball, radius, lower, upper, shrink)
    w_hat = np.empty((N, d))
    w_base = np.empty((N, d))
    for j in range(N):
        w_hat[j] = start
        w_base[j] = start
    w_prev = w_base.copy()
    gt = np.zeros(d)
    p = np.full(N, 1.0 / N)
    cum = np.zeros(N)
    m_next = np.zeros(N)
    sq = 0.0
    centers = np.empty((T, d))
    plays = np.empty((T, 2, d))
    values = np.empty((T, 2))
    vv = np.empty(T)
    innov_sq = np.empty(T)
    weights = np.empty((T, N))
    bad = -1
    for t in range(T):
        w = np.zeros(d)
        for j in range(N):
            for k in range(d):
                w[k] += p[j] * w_base[j, k]
        i = coords[t]
        xp = w.copy()
        xm = w.copy()
        xp[i] += delta
        xm[i] -= delta
        fp = value_kernel(A, B, C, t, xp)
        fm = value_kernel(A, B, C, t, xm)
        v = (fp - fm) / (2.0 * delta)
        if abs(v) > gbound and bad < 0:
            bad = t
        gt_old = gt.copy()
        g, innov = estimate_kernel(gt, i, v)
        centers[t] = w
        plays[t, 0] = xp
        plays[t, 1] = xm
        values[t, 0] = fp
        values[t, 1] = fm
        vv[t] = v
        innov_sq[t] = innov * innov
        weights[t] = p
        worst = 0.0
        for j in range(N):
            mv = 0.0
            lg = 0.0
            lm = 0.0
            for k in range(d):
                dk = w_base[j, k] - w_prev[j, k]
                mv += dk * dk
                lg += g[k] * w_base[j, k]
                lm += gt_old[k] * w_base[j, k]
            cum[j] += lg + gamma * mv
            if abs(lg - lm) > worst:
                worst = abs(lg - lm)
        eps = 0.0
        if lnN > 0.0:
            eps = np.sqrt(lnN / (C0 * C0 + sq))
        sq += worst * worst
        for j in range(N):
            w_prev[j] = w_base[j]
            nh, nw = oogd_kernel(w_hat[j], g, gt, etas[j], etas[j], is_ball, radius, lower, upper, shrink)
            w_hat[j] = nh
            w_base[j] = nw
        for j in range(N):
            mv = 0.0
            lm = 0.0
            for k in range(d):
                dk = w_base[j, k] - w_prev[j, k]
                mv += dk * dk
                lm += gt[k] * w_base[j, k]
            m_next[j] = lm + gamma * mv
        p = hedge_weights(cum, m_next, eps)
    return centers, plays, values, vv, innov_sq, weights, bad


def run_dynamic(
    adversary: LossSequence,
    T: int | None = None,
    seed: int = 0,
    overrides: dict | None = None,
    etas=None,
    summarize: bool = True,
) -> RunRecord:
    overrides = overrides or {}
    T = adversary.horizon if T is None else int(T)
    d = adversary.dim
    domain = adversary.domain
    R, L = domain.circumradius, adversary.L
    pool = np.asarray(etas if etas is not None else dynamic_pool(R, L, d, T), dtype=float)
    N = pool.size
    lnT = math.log(max(T, 2))
    lnN = math.log(N)
    C0 = 16.0 * R**3 * math.sqrt(d**3 * lnT * lnN)
    gamma = 4.0 * R * L * math.sqrt(d**3 * lnT)
    delta, xi = exploration_parameters(domain, d, L, T, overrides)
    rng = Rng(seed)
    coords = rng.coordinates(d, T)
    bandit = adversary.bandit_view()
    centers, plays, values, vv, innov_sq, weights, bad = dynamic_kernel(
        bandit.curvature, bandit.linear[:T], bandit.offset[:T], *domain.kernel_args(), xi, delta,
        coords, pool, C0, gamma, lnN, _g_tolerance(adversary.G),
    )
    if bad >= 0:
        raise BoundViolation(f"|v_t| exceeds declared G at round {bad + 1}")
    rec = RunRecord("dynamic", int(seed), d, xi, delta, centers, plays, values, coords, vv, np.zeros(T), innov_sq, weights=weights)
    rec.extras = {"pool": pool, "C0": C0, "gamma": gamma}
    if summarize:
        rec.summary = metrics.summarize(rec, adversary)
        U = adversary.comparators()[:T]
        rec.summary["dynamic_regret"] = metrics.dynamic_regret(rec, adversary, U)
        rec.summary["PT"] = metrics.path_length(U)
    return rec


@jit
def universal_kernel(A, B, C, is_ball, radius, lower, upper, shrink, delta, coords, lams, R, scale, bound, tol, gbound):
    T = coords.shape[0]
    d = A.shape[0]
    n_sc = lams.shape[0]
    N = n_sc + 2
    lnN = np.log(N)
    is_sc = np.zeros(N, dtype=np.bool_)
    is_sc[:n_sc] = True
    start = project_kernel(np.zeros(d), is_ball, radius, lower, upper, shrink)
    w_hat = np.empty((N, d))
    w_base = np.empty((N, d))
    for j in range(N):
        w_hat[j] = start
        w_base[j] = start
    logW = np.full(N, -np.log(N))
    eps = np.full(N, 0.125)
    sq = np.zeros(N)
    m = np.zeros(N)
    p = np.full(N, 1.0 / N)
    gt = np.zeros(d)
    vbar = 0.0
    z = 0.0
    centers = np.empty((T, d))
    plays = np.empty((T, 2, d))
    values = np.empty((T, 2))
    vv = np.empty(T)
    innov_sq = np.empty(T)
    weights = np.empty((T, N))
    ell = np.empty(N)
    r = np.empty(N)
    worst_clip = 0.0
    clips = 0
    fallbacks = 0
    failures = 0
    bad = -1
    for t in range(T):
        w = np.zeros(d)
        for j in range(N):
            for k in range(d):
                w[k] += p[j] * w_base[j, k]
        i = coords[t]
        xp = w.copy()
        xm = w.copy()
        xp[i] += delta
        xm[i] -= delta
        fp = value_kernel(A, B, C, t, xp)
        fm = value_kernel(A, B, C, t, xm)
        v = (fp - fm) / (2.0 * delta)
        if abs(v) > gbound and bad < 0:
            bad = t
        g, innov = estimate_kernel(gt, i, v)
        centers[t] = w
        plays[t, 0] = xp
        plays[t, 1] = xm
        values[t, 0] = fp
        values[t, 1] = fm
        vv[t] = v
        innov_sq[t] = innov * innov
        weights[t] = p
        mixed = 0.0
        for j in range(N):
            s = 0.0
            for k in range(d):
                s += g[k] * w_base[j, k]
            raw = s / scale + 0.5
            over = max(raw - 1.0, -raw)
            if over > 0.0:
                clips += 1
                if over > worst_clip:
                    worst_clip = over
                raw = min(1.0, max(0.0, raw))
            ell[j] = raw
            mixed += p[j] * raw
        for j in range(N):
            r[j] = mixed - ell[j]
        eta_cv = 2.0 * R / np.sqrt(d * d + vbar)
        vbar += innov * innov
        eta_cv_next = 2.0 * R / np.sqrt(d * d + vbar)
        tau = t + 1.0
        for j in range(N):
            if j < n_sc:
                lam = lams[j]
                grad = g + 0.5 * lam * (w_base[j] - w)
                opt = gt + 0.5 * lam * (w_base[j] - w)
                nh, nw = oogd_kernel(w_hat[j], grad, opt, 2.0 / (lam * tau), 2.0 / (lam * (tau + 1.0)), is_ball, radius, lower, upper, shrink)
            else:
                nh, nw = oogd_kernel(w_hat[j], g, gt, eta_cv, eta_cv_next, is_ball, radius, lower, upper, shrink)
            w_hat[j] = nh
            w_base[j] = nw
        mlprod_potentials(logW, eps, sq, r, m, lnN)
        z_new, status = fixed_point_kernel(gt, w_base, logW, eps, is_sc, scale, bound, tol, z)
        if status == 1:
            fallbacks += 1
        elif status == 2:
            failures += 1
        z = z_new
        inner = np.empty(N)
        for j in range(N):
            s = 0.0
            for k in range(d):
                s += gt[k] * w_base[j, k]
            inner[j] = s
        p, m = _mixture(z, inner, w_base, logW, eps, is_sc, scale)
    return centers, plays, values, vv, innov_sq, weights, worst_clip, clips, fallbacks, failures, bad


def run_universal(
    adversary: LossSequence,
    T: int | None = None,
    seed: int = 0,
    overrides: dict | None = None,
    summarize: bool = True,
) -> RunRecord:
    overrides = overrides or {}
    T = adversary.horizon if T is None else int(T)
    d = adversary.dim
    domain = adversary.domain
    R = domain.circumradius
    if adversary.lam > 1.0:
        log.warning("lam = %g lies above the pool's range [1/T, 1]", adversary.lam)
    lams = np.asarray(sc_pool(T), dtype=float)
    delta, xi = exploration_parameters(domain, d, adversary.L, T, overrides)
    G = adversary.G
    scale = 2.0 * math.sqrt(10.0) * d * G * R
    bound = math.sqrt(d) * G * R
    tol = float(overrides.get("tol", 1.0 / max(T, 1)))
    rng = Rng(seed)
    coords = rng.coordinates(d, T)
    bandit = adversary.bandit_view()
    out = universal_kernel(
        bandit.curvature, bandit.linear[:T], bandit.offset[:T], *domain.kernel_args(), xi, delta,
        coords, lams, R, scale, bound, tol, _g_tolerance(G),
    )
    centers, plays, values, vv, innov_sq, weights, worst_clip, clips, fallbacks, failures, bad = out
    if bad >= 0:
        raise BoundViolation(f"|v_t| exceeds declared G at round {bad + 1}")
    if failures:
        log.warning("optimism fixed point reused the previous value %d times", failures)
    rec = RunRecord("universal", int(seed), d, xi, delta, centers, plays, values, coords, vv, np.zeros(T), innov_sq, weights=weights)
    labels = [f"sc{j}" for j in range(lams.size)] + ["cvx", "lin"]
    rec.extras = {
        "lams": lams,
        "labels": labels,
        "dominant": np.argmax(weights, axis=1) if T else np.zeros(0, dtype=np.int64),
        "max_clip": float(worst_clip),
        "clips": int(clips),
        "fixed_point_fallbacks": int(fallbacks),
        "fixed_point_failures": int(failures),
    }
    if summarize:
        rec.summary = metrics.summarize(rec, adversary)
    return rec
