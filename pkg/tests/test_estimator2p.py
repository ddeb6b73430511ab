import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banditgv import estimator2p as est
from banditgv.geometry import Domain, InputError, Rng


def test_query_points():
    xp, xm = est.query_points([0.0, 0.0], 0, 0.1)
    assert np.allclose(xp, [0.1, 0.0]) and np.allclose(xm, [-0.1, 0.0])
    xp, xm = est.query_points([0.2, 0.3], 1, 0.0)
    assert np.array_equal(xp, xm)


def test_query_points_feasible_in_shrunk_ball():
    rng = np.random.Generator(np.random.PCG64(1))
    dom = Domain.ball(1.0, 3)
    for _ in range(500):
        w = rng.normal(size=3)
        w *= rng.uniform(0, 0.9) / np.linalg.norm(w)
        for x in est.query_points(w, int(rng.integers(3)), 0.1):
            assert dom.contains(x)


def test_directional_value():
    ell = np.array([3.0, 1.0])
    w = np.array([0.2, -0.4])
    for delta in (1e-3, 0.5):
        xp, xm = est.query_points(w, 0, delta)
        assert est.directional_value(ell @ xp, ell @ xm, delta) == pytest.approx(3.0, abs=1e-12)
    assert est.directional_value(2.0, 2.0, 0.3) == 0.0
    assert est.directional_value(0.6**2, 0.4**2, 0.1) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InputError):
        est.directional_value(1.0, 0.0, 0.0)


def test_update_examples():
    s = est.TwoPointEstimatorState.create(2, 0.1)
    s.optimism[:] = [1.0, 2.0]
    assert np.allclose(est.update(s, 1, 0, 3.0), [5.0, 2.0])
    assert np.allclose(s.optimism, [3.0, 2.0])
    assert np.allclose(est.update(s, 2, 1, 2.0), [3.0, 2.0])
    s = est.TwoPointEstimatorState.create(3, 0.1)
    assert np.allclose(est.update(s, 1, 1, 1.0), [0.0, 3.0, 0.0])
    with pytest.raises(InputError):
        est.update(s, 2, 3, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.data())
def test_innovation_on_one_coordinate(d, data):
    gt = np.array(data.draw(st.lists(st.floats(-10, 10), min_size=d, max_size=d)))
    i = data.draw(st.integers(0, d - 1))
    v = data.draw(st.floats(-10, 10))
    s = est.TwoPointEstimatorState.create(d, 0.1)
    s.optimism[:] = gt
    g = est.update(s, 1, i, v)
    diff = g - gt
    mask = np.arange(d) != i
    assert np.all(diff[mask] == 0.0)
    assert diff[i] == pytest.approx(d * (v - gt[i]))


def test_rho_singleton_dimension():
    r = est.rho_statistics(np.zeros(100, dtype=np.int64), 1)
    assert r.mean_rho == 1.0 and r.mean_max_rho == 1.0


def test_rho_matrix_small():
    # rounds 1..4 sample coordinates 0,1,0,0 with d=2
    rho = est.rho_matrix(np.array([0, 1, 0, 0]), 2)
    assert rho[:, 0].tolist() == [1, 2, 2, 1]
    assert rho[:, 1].tolist() == [2, 2, 3, 3]


def test_coupon_statistics_d3():
    c = est.coupon_statistics(Rng(12).coordinates(3, 100_000), 3)
    assert abs(c.mean_first_hit - 3.0) <= 0.15
    assert abs(c.mean_collection - 5.5) <= 0.275
    assert est.harmonic(3) == pytest.approx(11 / 6)


def test_empty_statistics():
    assert est.rho_statistics(np.zeros(0, dtype=np.int64), 3) is None
