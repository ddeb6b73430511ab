import numpy as np
import pytest

from banditgv import adversary as adv
from banditgv.geometry import Domain

BALL = Domain.ball(1.0, 2)
BOX = Domain.box([-1.0, -1.0], [1.0, 1.0])


def test_values():
    assert adv.stationary_linear([1.0, 0.0], 3, BALL).value(1, [0.5, 3.0]) == pytest.approx(0.5)
    sq = adv.strong_quadratic(2.0, np.zeros((3, 2)), BALL)
    assert sq.value(1, [1.0, 0.0]) == pytest.approx(1.0)
    qd = adv.quadratic_drift(np.eye(2), np.zeros((3, 2)), BALL)
    assert qd.value(2, [0.0, 0.0]) == 0.0


def test_gradients():
    lin = adv.stationary_linear([1.0, 0.0], 2, BALL)
    assert np.array_equal(lin.gradient(1, [0.3, -0.7]), [1.0, 0.0])
    sq = adv.strong_quadratic(2.0, np.tile([1.0, 0.0], (2, 1)), BALL)
    assert np.allclose(sq.gradient(1, [0.0, 0.0]), [-2.0, 0.0])


def test_gradient_matches_finite_difference():
    rng = np.random.Generator(np.random.PCG64(0))
    A = rng.normal(size=(3, 3))
    A = A @ A.T
    seq = adv.quadratic_drift(A, rng.normal(size=(4, 3)), Domain.ball(1.0, 3))
    h = 1e-6
    for t in (1, 4):
        x = rng.uniform(-0.5, 0.5, 3)
        fd = np.array([(seq.value(t, x + h * e) - seq.value(t, x - h * e)) / (2 * h) for e in np.eye(3)])
        assert np.allclose(fd, seq.gradient(t, x), rtol=1e-6, atol=1e-8)


def test_gradient_variation():
    assert adv.stationary_linear([1.0, 0.0], 10, BALL).gradient_variation() == 0.0
    assert adv.linear_drift([[1.0, 0.0], [0.0, 1.0]], BALL).gradient_variation() == pytest.approx(2.0)
    sq = adv.strong_quadratic(2.0, [[0.0, 0.0], [0.5, 0.0]], BALL)
    assert sq.gradient_variation() == pytest.approx(1.0)


def test_per_round_min():
    sq = adv.strong_quadratic(1.0, np.tile([0.2, 0.1], (3, 1)), BALL)
    assert sq.per_round_min(2) == pytest.approx(0.0, abs=1e-12)
    lin = adv.stationary_linear([1.0, 0.0], 2, BOX)
    assert lin.per_round_min(1, inflation=0.5) == pytest.approx(-1.5)
    qd = adv.quadratic_drift(np.eye(2), np.zeros((2, 2)), BALL)
    assert qd.per_round_min(1) == pytest.approx(0.0, abs=1e-12)


def test_best_fixed():
    lin = adv.linear_drift([[1.0, 0.0], [-1.0, 0.0]], BOX)
    x, total = lin.best_fixed()
    assert np.array_equal(x, [0.0, 0.0]) and total == 0.0
    x, total = adv.stationary_linear([1.0, 0.0], 2, BOX).best_fixed()
    assert x[0] == pytest.approx(-1.0) and total == pytest.approx(-2.0)
    c = np.array([0.3, -0.1])
    x, total = adv.strong_quadratic(0.5, np.tile(c, (5, 1)), BALL).best_fixed()
    assert np.allclose(x, c, atol=1e-8) and total == pytest.approx(0.0, abs=1e-12)


def test_sign_patterns():
    assert np.all(adv.sign_pattern(10, "constant") == 1)
    s = adv.sign_pattern(1000, "sqrt_walk")
    assert np.sum(np.diff(s) != 0) > 100
    assert np.array_equal(adv.sign_pattern(50, "random", 3), adv.sign_pattern(50, "random", 3))
    with pytest.raises(Exception):
        adv.sign_pattern(10, "nope")


def test_adversary_stream_independent_of_learner_stream():
    from banditgv.geometry import Rng

    s = adv.sign_pattern(2000, "random", 7)
    bits = (Rng(7).generator.integers(0, 2, size=2000) * 2 - 1).astype(float)
    assert not np.array_equal(s, bits)


def test_piecewise_requires_shared_curvature():
    a = adv.stationary_linear([1.0, 0.0], 4, BALL)
    b = adv.strong_quadratic(1.0, np.zeros((4, 2)), BALL)
    with pytest.raises(adv.UnsupportedFamilyError):
        adv.piecewise([a, b])
    pw = adv.piecewise([a, adv.stationary_linear([0.0, 1.0], 4, BALL)])
    assert pw.horizon == 8 and pw.comparators().shape == (8, 2)


def test_bandit_view_hides_gradients():
    view = adv.stationary_linear([1.0, 0.0], 3, BALL).bandit_view()
    assert view.value(1, [0.5, 0.0]) == pytest.approx(0.5)
    assert not hasattr(view, "gradient")
