"""Acceptance checks, shared by ``banditgv accept`` and the test-suite.

Each ``criterion_N`` returns a list of :class:`Result` sub-checks.  Thresholds
live here and nowhere else.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversary as adv
from . import bco2p, blo1p, ensemble, estimator2p, game, metrics
from .geometry import Domain, Rng

SEEDS = list(range(20))


@dataclass(frozen=True)
class Result:
    criterion: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion:>2} {self.name}: {self.detail}"


def _mean_regret(runner, seeds=SEEDS, key="regret_center"):
    return metrics.aggregate([runner(s).summary[key] for s in seeds])


# 1 -----------------------------------------------------------------------------


def criterion_1() -> list[Result]:
    out = []
    T = 10_000
    for d in (2, 5, 10):
        dom = Domain.ball(1.0, d)
        center = np.full(d, 0.3 / math.sqrt(d))
        a = adv.drifting_strong_quadratic(T, dom, 0.5, center, np.eye(d)[0], 0.4, "random", seed=d)
        rec = bco2p.run_two_point("variance", a, seed=11, summarize=False)
        G = a.G
        gt, g, inn = rec.extras["gtilde_sq"], rec.extras["g_sq"], rec.innov_sq
        slack = 1.0 + 1e-12
        det = bool(np.all(gt <= d * G * G * slack) and np.all(g <= 10 * d * d * G * G * slack) and np.all(inn <= 4 * d * d * G * G * slack))
        out.append(Result(1, f"estimator deterministic bounds d={d}", det,
                          f"max ||gt||^2/dG^2={gt.max() / (d * G * G):.3g}, max ||g||^2/10d^2G^2={g.max() / (10 * d * d * G * G):.3g}, "
                          f"max innov/4d^2G^2={inn.max() / (4 * d * d * G * G):.3g}"))
        mg, sg = metrics.aggregate(g)
        mi, si = metrics.aggregate(inn)
        ok = mg <= 9 * d * G * G + 3 * sg and mi <= 4 * d * G * G + 3 * si
        out.append(Result(1, f"estimator mean bounds d={d}", bool(ok),
                          f"E||g||^2={mg:.4g} (<= {9 * d * G * G:.4g}), E||g-gt||^2={mi:.4g} (<= {4 * d * G * G:.4g})"))
    return out


# 2 -----------------------------------------------------------------------------


def criterion_2() -> list[Result]:
    rng = np.random.Generator(np.random.PCG64(2024))
    worst2 = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 8))
        w = rng.uniform(-0.5, 0.5, d)
        gt = rng.normal(size=d)
        ell = rng.normal(size=d)
        delta = 0.05
        avg = np.zeros(d)
        for i in range(d):
            xp, xm = estimator2p.query_points(w, i, delta)
            v = estimator2p.directional_value(ell @ xp, ell @ xm, delta)
            state = estimator2p.TwoPointEstimatorState.create(d, delta)
            state.optimism[:] = gt
            avg += estimator2p.update(state, 1, i, v)
        avg /= d
        worst2 = max(worst2, float(np.max(np.abs(avg - ell))))
    worst1 = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 6))
        lo = -rng.uniform(0.5, 2.0, d)
        hi = rng.uniform(0.5, 2.0, d)
        dom = Domain.box(lo, hi)
        base = blo1p.BarrierState.create(dom)
        base.w = lo + (hi - lo) * rng.uniform(0.1, 0.9, d)
        base.r_plus = rng.normal(size=d)
        base.r_minus = rng.normal(size=d)
        ell = rng.normal(size=d)
        avg = np.zeros(d)
        for i in range(d):
            for eps in (-1, 1):
                st = blo1p.BarrierState(base.w.copy(), base.gsum.copy(), base.r_plus.copy(), base.r_minus.copy(), lo, hi)
                x = blo1p.play_action(st, i, eps)
                avg += blo1p.estimate(st, i, eps, float(ell @ x))
        avg /= 2 * d
        worst1 = max(worst1, float(np.max(np.abs(avg - ell))))
    return [
        Result(2, "two-point unbiasedness on linear losses", worst2 <= 1e-12, f"max error {worst2:.3g}"),
        Result(2, "one-point unbiasedness on linear losses", worst1 <= 1e-12, f"max error {worst1:.3g}"),
    ]


# 3 -----------------------------------------------------------------------------


def criterion_3() -> list[Result]:
    out = []
    T = 100_000
    for d in (3, 5, 10):
        coords = Rng(3000 + d).coordinates(d, T)
        c = estimator2p.coupon_statistics(coords, d)
        r = estimator2p.rho_statistics(coords, d)
        hit_ok = abs(c.mean_first_hit - d) <= 0.05 * d
        expect = d * estimator2p.harmonic(d)
        coll_ok = abs(c.mean_collection - expect) <= 0.05 * expect
        rho_ok = r.mean_rho <= 2 * d + 3 * r.se_rho
        max_ok = r.mean_max_rho <= 4 * d * math.log(d) + 3 * r.se_max_rho
        out.append(Result(3, f"first-hit mean d={d}", hit_ok, f"{c.mean_first_hit:.4f} vs {d}"))
        out.append(Result(3, f"coupon collection mean d={d}", coll_ok, f"{c.mean_collection:.4f} vs {expect:.4f}"))
        out.append(Result(3, f"sampling-gap bounds d={d}", rho_ok and max_ok,
                          f"E[rho]={r.mean_rho:.3f} (<= {2 * d}), E[max rho]={r.mean_max_rho:.3f} (<= {4 * d * math.log(d):.3f})"))
    return out


# 4 -----------------------------------------------------------------------------


def convex_drift(T: int) -> adv.LossSequence:
    return adv.drifting_linear(T, Domain.ball(1.0, 2), [0.0, 0.0], [1.0, 0.0], 1.0, "sqrt_walk")


def criterion_4() -> list[Result]:
    pts = []
    for T in (2**9, 2**10, 2**11, 2**12, 2**13):
        a = convex_drift(T)
        m, _ = _mean_regret(lambda s: bco2p.run_two_point("gv_convex", a, seed=s))
        pts.append((T, m))
    fit = metrics.slope_fit(pts)
    res = [Result(4, "convex GV slope", 0.35 <= fit.slope <= 0.65, f"slope {fit.slope:.3f} +/- {fit.half_width:.3f}")]
    dom = Domain.ball(1.0, 2)
    r = {}
    for T in (2**10, 2**12):
        a = adv.stationary_linear([1.0, 0.0], T, dom)
        r[T], _ = _mean_regret(lambda s: bco2p.run_two_point("gv_convex", a, seed=s))
    ratio = r[2**12] / r[2**10]
    res.append(Result(4, "convex stationary control", ratio <= 2.2, f"regret ratio {ratio:.3f}"))
    return res


# 5 -----------------------------------------------------------------------------


def strong_drift(T: int) -> adv.LossSequence:
    return adv.drifting_strong_quadratic(T, Domain.ball(1.0, 2), 0.5, [0.3, 0.1], [0.0, 1.0], 0.3, "random", seed=7)


def criterion_5() -> list[Result]:
    r = {}
    for T in (2**10, 2**13):
        a = strong_drift(T)
        r[T], _ = _mean_regret(lambda s: bco2p.run_two_point("gv_strongly_convex", a, seed=s))
    ratio = r[2**13] / r[2**10]
    limit = 1.5 * math.log(2**13) / math.log(2**10)
    return [Result(5, "strongly convex GV scaling", ratio <= limit, f"ratio {ratio:.3f} (<= {limit:.3f})")]


# 6 -----------------------------------------------------------------------------


def criterion_6() -> list[Result]:
    r = {}
    for T in (1000, 10_000):
        a = adv.strong_quadratic(0.5, np.tile([0.3, -0.2], (T, 1)), Domain.ball(1.0, 2))
        r[T], _ = _mean_regret(lambda s: bco2p.run_two_point("small_loss", a, seed=s))
    ratio = r[10_000] / r[1000]
    return [Result(6, "small-loss bounded regret", ratio <= 1.3,
                   f"regret {r[1000]:.4g} -> {r[10_000]:.4g}, ratio {ratio:.3f}")]


# 7 -----------------------------------------------------------------------------


def grid_root(S, c, eta, a, b, n=1_000_000):
    """Sign-change bracket on an n-point grid, refined by linear interpolation."""
    x = np.linspace(a, b, n + 2)[1:-1]
    F = eta * (S + c * np.sqrt(1 / (x - a) ** 2 + 1 / (b - x) ** 2)) + 1 / (b - x) - 1 / (x - a)
    k = int(np.argmax(F > 0))
    if k == 0:
        return float(x[0])
    x0, x1, f0, f1 = x[k - 1], x[k], F[k - 1], F[k]
    return float(x0 - f0 * (x1 - x0) / (f1 - f0))


def criterion_7() -> list[Result]:
    rng = np.random.Generator(np.random.PCG64(77))
    worst = 0.0
    for _ in range(100):
        a = -float(rng.uniform(0.5, 2.0))
        b = float(rng.uniform(0.5, 2.0))
        eta = float(rng.uniform(0.01, 0.5))
        c = float(rng.uniform(-0.99, 0.99)) / eta
        S = float(rng.uniform(-10, 10))
        w = blo1p.solve_coordinate(S, c, eta, a, b, 1e-12)
        worst = max(worst, abs(w - grid_root(S, c, eta, a, b)))
    res = [Result(7, "solver vs grid oracle", worst <= 1e-6, f"max |diff| {worst:.3g}")]
    T = 10_000
    dom = Domain.box([-1.0, -1.0], [1.0, 1.0])
    a = adv.drifting_linear(T, dom, [0.2, 0.0], [1.0, 0.5], 0.8, "random", seed=5)
    rec = blo1p.run_one_point(a, seed=3, summarize=False)
    x = rec.plays[:, 0]
    inside = bool(np.all(x > dom.lower) and np.all(x < dom.upper) and np.all(rec.centers > dom.lower) and np.all(rec.centers < dom.upper))
    res.append(Result(7, "strict interiority", inside and rec.extras["outside"] == 0, f"{T} rounds checked"))
    s = adv.stationary_linear([1.0, 0.0], T, dom)
    coarse = blo1p.run_one_point(s, seed=4, overrides={"tol": 1.0 / T}, summarize=False)
    fine = blo1p.run_one_point(s, seed=4, overrides={"tol": 0.1 / T}, summarize=False)
    l1, l2 = coarse.values.sum(), fine.values.sum()
    rel = abs(l1 - l2) / abs(l2)
    res.append(Result(7, "tolerance robustness", rel < 0.01, f"total loss {l1:.6g} vs {l2:.6g}, rel diff {rel:.3g}"))
    return res


# 8 -----------------------------------------------------------------------------


def criterion_8() -> list[Result]:
    dom = Domain.box([-1.0, -1.0], [1.0, 1.0])
    pts = []
    for T in (2**9, 2**10, 2**11, 2**12):
        a = adv.drifting_linear(T, dom, [0.0, 0.0], [1.0, 0.0], 1.0, "sqrt_walk")
        m, _ = _mean_regret(lambda s: blo1p.run_one_point(a, seed=s), key="regret_avg")
        pts.append((T, m))
    fit = metrics.slope_fit(pts)
    res = [Result(8, "one-point GV slope", 0.35 <= fit.slope <= 0.7, f"slope {fit.slope:.3f} +/- {fit.half_width:.3f}")]
    r = {}
    for T in (2000, 4000):
        a = adv.stationary_linear([1.0, 0.0], T, dom)
        r[T], _ = _mean_regret(lambda s: blo1p.run_one_point(a, seed=s), key="regret_avg")
    ratio = r[4000] / r[2000]
    res.append(Result(8, "one-point stationary control", ratio <= 1.6, f"regret ratio {ratio:.3f}"))
    return res


# 9 -----------------------------------------------------------------------------


def curvature_classes(T: int):
    dom = Domain.ball(1.0, 2)
    return {
        "linear": (adv.stationary_linear([1.0, 0.0], T, dom), "gv_convex"),
        "convex": (adv.quadratic_drift(np.diag([1.0, 0.0]), np.tile([-0.5, 0.5], (T, 1)), dom), "gv_convex"),
        "strongly convex": (strong_drift(T), "gv_strongly_convex"),
    }


def _simplex_ok(W) -> bool:
    return bool(np.all(W >= 0) and np.all(np.abs(W.sum(axis=1) - 1.0) <= 1e-12))


def criterion_9() -> list[Result]:
    T = 4096
    res = []
    simplex = True
    worst_clip = 0.0
    for name, (a, dedicated) in curvature_classes(T).items():
        uni = [ensemble.run_universal(a, seed=s) for s in SEEDS]
        ded = [bco2p.run_two_point(dedicated, a, seed=s) for s in SEEDS]
        simplex &= all(_simplex_ok(r.weights) for r in uni)
        worst_clip = max(worst_clip, max(r.extras["max_clip"] for r in uni))
        mu, _ = metrics.aggregate([r.summary["regret_center"] for r in uni])
        md, _ = metrics.aggregate([r.summary["regret_center"] for r in ded])
        ratio = mu / md
        res.append(Result(9, f"universal vs {dedicated} ({name})", ratio <= 3.0,
                          f"universal {mu:.4g}, dedicated {md:.4g}, ratio {ratio:.3f}"))
    pw = adv.piecewise([adv.stationary_linear(v, T // 2, Domain.ball(1.0, 2)) for v in ([1.0, 0.0], [-0.5, 1.0])])
    for s in SEEDS[:5]:
        simplex &= _simplex_ok(ensemble.run_dynamic(pw, seed=s).weights)
    res.insert(0, Result(9, "meta weights on the simplex", simplex, "every round, universal and dynamic"))
    res.insert(1, Result(9, "universal meta-loss pre-clip violation", worst_clip < 1e-9, f"max violation {worst_clip:.3g}"))
    eta = 0.05
    single = ensemble.run_dynamic(pw, seed=1, etas=[eta])
    base = bco2p.run_two_point("gv_convex", pw, seed=1, overrides={"eta": eta})
    same = np.array_equal(single.centers, base.centers) and np.array_equal(single.plays, base.plays)
    res.insert(2, Result(9, "dynamic N=1 reduction", bool(same), "centres identical to the single base learner"))
    return res


# 10 ----------------------------------------------------------------------------


GAMES = {
    "1x1": np.array([[1.0]]),
    "2x2": np.array([[0.6, -0.3], [0.2, 0.5]]),
}


def brute_force_gap(A, xbar, ybar, X: Domain, Y: Domain) -> float:
    from itertools import product

    xv = [np.array(v) for v in product(*zip(X.lower, X.upper))]
    yv = [np.array(v) for v in product(*zip(Y.lower, Y.upper))]
    return max(float(xbar @ A @ y) for y in yv) - min(float(x @ A @ ybar) for x in xv)


def criterion_10() -> list[Result]:
    res = []
    ident = 0.0
    for name, A in GAMES.items():
        m, n = A.shape
        cfg = game.GameConfig(A, Domain.box(-np.ones(m), np.ones(m)), Domain.box(-np.ones(n), np.ones(n)), 4096)
        recs = [game.run_game(cfg, s) for s in SEEDS]
        gaps = np.mean([r.gaps for r in recs], axis=0)
        ratio = gaps[-1] / gaps[-2]
        res.append(Result(10, f"game gap decay {name}", ratio <= 0.6,
                          f"gap(2048)={gaps[-2]:.4g}, gap(4096)={gaps[-1]:.4g}, ratio {ratio:.3f}"))
        for r in recs:
            ident = max(ident, float(np.max(np.abs(r.gaps - (r.regret_x + r.regret_y) / r.checkpoints))))
    res.append(Result(10, "gap equals regret sum over T", ident <= 1e-9, f"max deviation {ident:.3g}"))
    rng = np.random.Generator(np.random.PCG64(10))
    worst = 0.0
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(1, 5, size=2))
        A = rng.normal(size=(m, n))
        A /= max(1.0, np.linalg.norm(A, 2))
        X = Domain.box(-rng.uniform(0.2, 2, m), rng.uniform(0.2, 2, m))
        Y = Domain.box(-rng.uniform(0.2, 2, n), rng.uniform(0.2, 2, n))
        xb = X.lower + (X.upper - X.lower) * rng.uniform(size=m)
        yb = Y.lower + (Y.upper - Y.lower) * rng.uniform(size=n)
        worst = max(worst, abs(game.duality_gap(A, xb, yb, X, Y) - brute_force_gap(A, xb, yb, X, Y)))
    res.append(Result(10, "duality gap vs vertex enumeration", worst <= 1e-12, f"max |diff| {worst:.3g}"))
    return res


# 11 ----------------------------------------------------------------------------


REPRO_CONFIG = """\
algorithm = gv_convex
T = 600
seeds = 3
domain.kind = ball
domain.radius = 1
domain.dim = 3
adversary.family = linear_drift
adversary.direction = 1,0.5,0
adversary.amplitude = 0.8
adversary.pattern = random
adversary.seed = 4
"""


def criterion_11() -> list[Result]:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        cfg = base / "run.cfg"
        cfg.write_text(REPRO_CONFIG)
        codes = [main(["run", str(cfg), "--out", str(base / k)]) for k in ("a", "b")]
        files_a = sorted(p.name for p in (base / "a").iterdir())
        files_b = sorted(p.name for p in (base / "b").iterdir())
        same = codes == [0, 0] and files_a == files_b and all(
            (base / "a" / f).read_bytes() == (base / "b" / f).read_bytes() for f in files_a
        )
    return [Result(11, "byte-identical reruns", same, f"{len(files_a)} files compared")]


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_all(only=None) -> list[Result]:
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        out.extend(fn())
    return out
