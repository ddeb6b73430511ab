"""Two-point bandit convex optimisation runners.

``run_two_point`` is optimistic OGD fed by the coordinate estimator, with the
step-size schedule selected by ``variant``.  ``run_sphere_sgd`` is the
baseline that probes along a uniformly random unit direction and does plain
projected gradient descent with eta_t = 1/(lam t).

All random draws happen up front from the seeded generator (coordinates
first, then any directions), so the jitted loop is a deterministic function
of its inputs.
"""

from __future__ import annotations

import logging

import numpy as np

from . import metrics
from ._accel import jit
from .adversary import LossSequence, value_kernel
from .estimator2p import estimate_kernel
from .geometry import Domain, Rng, project_kernel
from .oogd import ConfigError, Fixed, InverseLinear, convex_gv_schedule, eta_kernel, oogd_kernel, variance_schedule
from .records import RunRecord, empty_record

log = logging.getLogger(__name__)

VARIANTS = ("gv_convex", "gv_strongly_convex", "variance", "small_loss")


class BoundViolation(RuntimeError):
    """An observed quantity broke a bound implied by the declared constants."""


def exploration_parameters(domain: Domain, d: int, L: float, T: int, overrides: dict | None = None):
    """Default delta = 1/(2 d^2 L T R) and xi = delta / R.

    Queries w +/- delta e_i stay in X only if delta <= r * xi, so xi is raised
    to delta / r when the inradius r is smaller than R.
    """
    overrides = overrides or {}
    R = domain.circumradius
    r = domain.inradius
    delta = float(overrides.get("delta", 1.0 / (2.0 * d * d * L * max(T, 1) * R)))
    if not delta > 0:
        raise ConfigError("delta must be positive")
    xi = float(overrides.get("xi", delta / R))
    if r <= 0:
        raise ConfigError("the origin must be interior to the domain")
    if delta > r * xi:
        log.debug("raising shrink from %g to %g to keep queries feasible", xi, delta / r)
        xi = delta / r
    if not 0 <= xi < 1:
        raise ConfigError(f"shrink {xi} outside [0, 1); reduce delta")
    return delta, xi


def schedule_for(variant: str, adversary: LossSequence, T: int, overrides: dict | None = None):
    overrides = overrides or {}
    if "eta" in overrides:
        return Fixed(float(overrides["eta"]))
    d = adversary.dim
    R = adversary.domain.circumradius
    if variant == "gv_convex":
        return convex_gv_schedule(d, R, adversary.L, T)
    if variant == "gv_strongly_convex":
        lam = float(overrides.get("lam", adversary.lam))
        if not lam > 0:
            raise ConfigError("gv_strongly_convex needs an adversary with lam > 0")
        return InverseLinear(lam, 1.0)
    if variant in ("variance", "small_loss"):
        return variance_schedule(d, R)
    raise ConfigError(f"unknown two-point variant {variant!r}")


def _g_tolerance(G: float) -> float:
    return G * (1.0 + 1e-9) + 1e-12


@jit
def two_point_kernel(A, B, C, is_ball, radius, lower, upper, shrink, delta, coords, kind, a, b, gbound):
    T = coords.shape[0]
    d = A.shape[0]
    centers = np.empty((T, d))
    plays = np.empty((T, 2, d))
    values = np.empty((T, 2))
    vv = np.empty(T)
    etas = np.empty(T)
    innov_sq = np.empty(T)
    g_sq = np.empty(T)
    gt_sq = np.empty(T)
    w_hat = project_kernel(np.zeros(d), is_ball, radius, lower, upper, shrink)
    w = w_hat.copy()
    gt = np.zeros(d)
    vbar = 0.0
    bad = -1
    eta_t = eta_kernel(kind, a, b, 1.0, 0.0)
    for t in range(T):
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
        s = 0.0
        for k in range(d):
            s += gt[k] * gt[k]
        gt_sq[t] = s
        g, innov = estimate_kernel(gt, i, v)
        s = 0.0
        for k in range(d):
            s += g[k] * g[k]
        g_sq[t] = s
        centers[t] = w
        plays[t, 0] = xp
        plays[t, 1] = xm
        values[t, 0] = fp
        values[t, 1] = fm
        vv[t] = v
        etas[t] = eta_t
        innov_sq[t] = innov * innov
        vbar += innov * innov
        eta_next = eta_kernel(kind, a, b, t + 2.0, vbar)
        w_hat, w = oogd_kernel(w_hat, g, gt, eta_t, eta_next, is_ball, radius, lower, upper, shrink)
        eta_t = eta_next
    return centers, plays, values, vv, etas, innov_sq, g_sq, gt_sq, bad


def _horizon(adversary: LossSequence, T: int | None) -> int:
    T = adversary.horizon if T is None else int(T)
    if T < 0 or T > adversary.horizon:
        raise ConfigError(f"T={T} outside 0..{adversary.horizon}")
    return T


def run_two_point(
    variant: str,
    adversary: LossSequence,
    T: int | None = None,
    seed: int = 0,
    overrides: dict | None = None,
    summarize: bool = True,
) -> RunRecord:
    T = _horizon(adversary, T)
    d = adversary.dim
    domain = adversary.domain
    sched = schedule_for(variant, adversary, T, overrides)
    delta, xi = exploration_parameters(domain, d, adversary.L, T, overrides)
    if T == 0:
        rec = empty_record(variant, seed, d, 2, xi, delta)
        rec.summary = metrics.summarize(rec, adversary) if summarize else {}
        return rec
    rng = Rng(seed)
    coords = rng.coordinates(d, T)
    bandit = adversary.bandit_view()
    out = two_point_kernel(
        bandit.curvature,
        bandit.linear[:T],
        bandit.offset[:T],
        *domain.kernel_args(),
        xi,
        delta,
        coords,
        *sched.encode(),
        _g_tolerance(adversary.G),
    )
    centers, plays, values, vv, etas, innov_sq, g_sq, gt_sq, bad = out
    if bad >= 0:
        raise BoundViolation(f"|v_t| = {abs(vv[bad]):.6g} exceeds declared G = {adversary.G:.6g} at round {bad + 1}")
    rec = RunRecord(variant, int(seed), d, xi, delta, centers, plays, values, coords, vv, etas, innov_sq)
    rec.extras = {"g_sq": g_sq, "gtilde_sq": gt_sq, "G": adversary.G}
    if summarize:
        rec.summary = metrics.summarize(rec, adversary)
    return rec


@jit
def sphere_kernel(A, B, C, is_ball, radius, lower, upper, shrink, delta, U, lam, gbound):
    T = U.shape[0]
    d = A.shape[0]
    centers = np.empty((T, d))
    plays = np.empty((T, 2, d))
    values = np.empty((T, 2))
    vv = np.empty(T)
    etas = np.empty(T)
    g_sq = np.empty(T)
    w = project_kernel(np.zeros(d), is_ball, radius, lower, upper, shrink)
    bad = -1
    for t in range(T):
        xp = w + delta * U[t]
        xm = w - delta * U[t]
        fp = value_kernel(A, B, C, t, xp)
        fm = value_kernel(A, B, C, t, xm)
        v = (fp - fm) / (2.0 * delta)
        g = d * v * U[t]
        s = 0.0
        for k in range(d):
            s += g[k] * g[k]
        if np.sqrt(s) > d * gbound and bad < 0:
            bad = t
        centers[t] = w
        plays[t, 0] = xp
        plays[t, 1] = xm
        values[t, 0] = fp
        values[t, 1] = fm
        vv[t] = v
        eta_t = 1.0 / (lam * (t + 1.0))
        etas[t] = eta_t
        g_sq[t] = s
        w = project_kernel(w - eta_t * g, is_ball, radius, lower, upper, shrink)
    return centers, plays, values, vv, etas, g_sq, bad


def run_sphere_sgd(
    adversary: LossSequence,
    T: int | None = None,
    seed: int = 0,
    overrides: dict | None = None,
    summarize: bool = True,
) -> RunRecord:
    T = _horizon(adversary, T)
    overrides = overrides or {}
    lam = float(overrides.get("lam", adversary.lam))
    if not lam > 0:
        raise ConfigError("the sphere baseline needs an adversary with lam > 0")
    d = adversary.dim
    domain = adversary.domain
    R = domain.circumradius
    delta = float(overrides.get("delta", 1.0 / (2.0 * d * d * adversary.L * max(T, 1) * R)))
    xi = float(overrides.get("xi", delta / R))
    # w +/- delta u with ||u|| = 1 is feasible once delta <= r * xi
    if delta > domain.inradius * xi:
        xi = delta / domain.inradius
    if T == 0:
        rec = empty_record("sphere", seed, d, 2, xi, delta)
        rec.summary = metrics.summarize(rec, adversary) if summarize else {}
        return rec
    rng = Rng(seed)
    U = rng.unit_vectors(d, T)
    bandit = adversary.bandit_view()
    centers, plays, values, vv, etas, g_sq, bad = sphere_kernel(
        bandit.curvature, bandit.linear[:T], bandit.offset[:T], *domain.kernel_args(), xi, delta, U, lam, _g_tolerance(adversary.G)
    )
    if bad >= 0:
        raise BoundViolation(f"||g_t|| exceeds d*G at round {bad + 1}")
    coords = np.full(T, -1, dtype=np.int64)
    rec = RunRecord("sphere", int(seed), d, xi, delta, centers, plays, values, coords, vv, etas, np.zeros(T), directions=U)
    rec.extras = {"g_sq": g_sq, "G": adversary.G}
    if summarize:
        rec.summary = metrics.summarize(rec, adversary)
    return rec
