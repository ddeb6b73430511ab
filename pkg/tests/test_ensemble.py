import math

import numpy as np
import pytest

from banditgv import adversary as adv
from banditgv import bco2p, ensemble, metrics
from banditgv.geometry import Domain
from banditgv.oogd import ConfigError

BALL = Domain.ball(1.0, 2)


def test_dynamic_pool():
    assert ensemble.pool_base(1.0, 2, 1024) == pytest.approx(0.01327, abs=5e-6)
    cap = 1.0 / (16 * math.sqrt(8 * math.log(1024)))
    assert ensemble.pool_cap(1.0, 1.0, 2, 1024) == pytest.approx(cap)
    # base above the cap: the clamp leaves a single step
    assert ensemble.dynamic_pool(1.0, 1.0, 2, 1024) == [pytest.approx(cap)]
    for R, L, d, T in [(1.0, 1.0, 2, 2**20), (2.0, 0.5, 1, 4096), (1.0, 0.1, 3, 10**5)]:
        pool = ensemble.dynamic_pool(R, L, d, T)
        cap = ensemble.pool_cap(R, L, d, T)
        assert pool[-1] == pytest.approx(cap)
        assert all(e <= cap * (1 + 1e-12) for e in pool)
        assert all(b == pytest.approx(2 * a) for a, b in zip(pool[:-2], pool[1:-1]))
        assert all(a < b for a, b in zip(pool, pool[1:]))


def test_sc_pool():
    assert ensemble.sc_pool(8) == [0.125, 0.25, 0.5, 1.0]
    grid = ensemble.sc_pool(1000)
    for lam in np.geomspace(1 / 1000, 1, 40):
        assert any(g <= lam <= 2 * g for g in grid)
    with pytest.raises(ConfigError):
        ensemble.sc_pool(1)


def test_hedge_softmax_example():
    p = ensemble.hedge_weights(np.array([0.0, 10.0]), np.zeros(2), 1.0)
    assert np.allclose(p, np.array([1.0, math.exp(-10)]) / (1 + math.exp(-10)), rtol=1e-12)


def test_hedge_symmetry_and_shift():
    meta = ensemble.HedgeMeta.create(3, 1.0)
    for _ in range(5):
        p = ensemble.hedge_update(meta, np.full(3, 0.7), np.full(3, 0.2))
    assert np.allclose(p, 1 / 3)
    # at a fixed rate the softmax ignores a common shift
    cum = np.array([0.1, 0.5, 0.2])
    m = np.array([0.3, -0.1, 0.0])
    assert np.allclose(ensemble.hedge_weights(cum, m, 0.7), ensemble.hedge_weights(cum + 5.0, m, 0.7), atol=1e-12)


def test_hedge_without_optimism_is_exponential_weights():
    rng = np.random.Generator(np.random.PCG64(3))
    meta = ensemble.HedgeMeta.create(4, 2.0)
    cum = np.zeros(4)
    sq = 0.0
    for _ in range(20):
        ell = rng.uniform(size=4)
        eps = math.sqrt(math.log(4) / (4.0 + sq))
        sq += float(np.max(np.abs(ell))) ** 2
        cum += ell
        expect = np.exp(-eps * cum) / np.sum(np.exp(-eps * cum))
        assert np.allclose(ensemble.hedge_update(meta, ell, np.zeros(4)), expect, rtol=1e-12)


def test_mlprod_single_step():
    meta = ensemble.MLProdMeta.create(2)
    r = np.array([0.2, -0.2])
    p = ensemble.mlprod_update(meta, r, np.zeros(2), np.zeros(2))
    e = 1 / 8
    e_new = np.minimum(1 / 8, np.sqrt(math.log(2) / r**2))
    logW = (e_new / e) * (math.log(0.5) + e * r - e * e * r**2)
    assert np.allclose(meta.log_w, logW, atol=1e-12)
    q = e_new * np.exp(logW)
    assert np.allclose(p, q / q.sum(), atol=1e-12)


def test_mlprod_symmetric_and_zero():
    meta = ensemble.MLProdMeta.create(2)
    for _ in range(4):
        p = ensemble.mlprod_update(meta, np.array([0.3, 0.3]), np.zeros(2), np.zeros(2))
    assert np.allclose(p, 0.5)
    meta = ensemble.MLProdMeta.create(3)
    assert np.allclose(ensemble.mlprod_update(meta, np.zeros(3), np.zeros(3), np.zeros(3)), 1 / 3)


def test_fixed_point():
    meta = ensemble.MLProdMeta.create(3)
    W = np.array([[0.5, 0.1], [-0.3, 0.4], [0.0, -0.6]])
    is_sc = [True, False, False]
    z, m, p, status = ensemble.universal_optimism_fixed_point(np.zeros(2), W, meta, is_sc, 5.0, 2.0, 1e-3)
    assert np.all(m == 0)
    gt = np.array([0.8, -1.1])
    z, m, p, status = ensemble.universal_optimism_fixed_point(gt, W, meta, is_sc, 5.0, 2.0, 1e-3)
    assert status == 0 and abs(z - gt @ (p @ W)) <= 1e-3
    assert m[0] == 0.0
    same = np.tile([0.2, 0.1], (3, 1))
    z, m, p, status = ensemble.universal_optimism_fixed_point(gt, same, meta, is_sc, 5.0, 2.0, 1e-6)
    assert np.allclose(m, 0.0, atol=1e-6)


def _pw(T):
    half = T // 2
    return adv.piecewise([adv.stationary_linear([1.0, 0.0], half, BALL), adv.stationary_linear([-0.5, 1.0], T - half, BALL)])


def test_dynamic_single_expert_reduction():
    a = _pw(512)
    one = ensemble.run_dynamic(a, seed=2, etas=[0.03])
    base = bco2p.run_two_point("gv_convex", a, seed=2, overrides={"eta": 0.03})
    assert np.array_equal(one.centers, base.centers)


def test_dynamic_stationary_matches_static():
    a = adv.stationary_linear([1.0, 0.0], 512, BALL)
    rec = ensemble.run_dynamic(a, seed=1)
    assert rec.summary["PT"] == 0.0
    assert rec.summary["dynamic_regret"] == pytest.approx(rec.summary["regret_avg"], abs=1e-9)


def test_dynamic_against_best_single_step():
    T = 4096
    a = _pw(T)
    pool = ensemble.dynamic_pool(1.0, a.L, 2, T)
    ens = [ensemble.run_dynamic(a, seed=s) for s in range(20)]
    mean_ens = metrics.aggregate([r.summary["dynamic_regret"] for r in ens])[0]
    best = math.inf
    U = a.comparators()
    for eta in pool:
        runs = [bco2p.run_two_point("gv_convex", a, seed=s, overrides={"eta": eta}) for s in range(20)]
        best = min(best, metrics.aggregate([metrics.dynamic_regret(r, a, U) for r in runs])[0])
    C0 = ens[0].extras["C0"]
    assert mean_ens <= best + 2 * C0 * math.sqrt(math.log(len(pool)))


def test_weights_on_simplex():
    a = _pw(600)
    for rec in (ensemble.run_dynamic(a, seed=0), ensemble.run_universal(a, seed=0)):
        assert np.all(rec.weights >= 0)
        assert np.allclose(rec.weights.sum(axis=1), 1.0, atol=1e-12)


def test_universal_meta_losses_unclipped():
    a = adv.drifting_strong_quadratic(1000, BALL, 0.5, [0.3, 0.1], [0.0, 1.0], 0.3, "random", seed=7)
    rec = ensemble.run_universal(a, seed=3)
    assert rec.extras["max_clip"] < 1e-9 and rec.extras["clips"] == 0
    assert len(rec.extras["labels"]) == rec.weights.shape[1]


def test_universal_strongly_convex_log_growth():
    r = {}
    for T in (2**10, 2**13):
        a = adv.drifting_strong_quadratic(T, BALL, 0.5, [0.3, 0.1], [0.0, 1.0], 0.3, "random", seed=7)
        r[T] = metrics.aggregate([ensemble.run_universal(a, seed=s).summary["regret_center"] for s in range(20)])[0] / math.log(T)
    assert r[2**13] / r[2**10] <= 2.0
