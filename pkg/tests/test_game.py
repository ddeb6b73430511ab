import numpy as np
import pytest

from banditgv import game, metrics
from banditgv.geometry import Domain, InputError
from banditgv.oogd import ConfigError

UNIT = Domain.box([-1.0], [1.0])


def test_duality_gap_examples():
    X = Domain.box([-1.0, -1.0], [1.0, 1.0])
    assert game.duality_gap(np.zeros((2, 2)), [0.3, 0.1], [-0.2, 0.5], X, X) == 0.0
    A = np.array([[1.0]])
    assert game.duality_gap(A, [0.0], [0.0], UNIT, UNIT) == 0.0
    assert game.duality_gap(A, [0.5], [0.0], UNIT, UNIT) == pytest.approx(0.5)
    with pytest.raises(InputError):
        game.duality_gap(A, [2.0], [0.0], UNIT, UNIT)


def test_config_validation():
    with pytest.raises(ConfigError):
        game.GameConfig(np.array([[2.0]]), UNIT, UNIT, 10)
    with pytest.raises(ConfigError):
        game.GameConfig(np.eye(2), UNIT, UNIT, 10)
    with pytest.raises(ConfigError):
        game.GameConfig(np.eye(1), Domain.ball(1.0, 1), UNIT, 10)


def test_operator_norm():
    A = np.random.Generator(np.random.PCG64(0)).normal(size=(3, 4))
    assert game.operator_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert game.operator_norm(np.zeros((2, 2))) == 0.0


def test_null_game():
    X = Domain.box([-1.0, -1.0], [1.0, 1.0])
    rec = game.run_game(game.GameConfig(np.zeros((2, 2)), X, X, 64), 0)
    assert np.all(rec.gaps == 0.0) and np.all(rec.payoffs == 0.0)


def test_gap_identity_and_checkpoints():
    X = Domain.box([-1.0, -0.5], [0.5, 1.0])
    A = np.array([[0.6, -0.3], [0.2, 0.5]])
    rec = game.run_game(game.GameConfig(A, X, X, 300), 4)
    assert rec.checkpoints.tolist() == [1, 2, 4, 8, 16, 32, 64, 128, 256, 300]
    assert np.allclose(rec.gaps, (rec.regret_x + rec.regret_y) / rec.checkpoints, atol=1e-9, rtol=0)
    assert np.all(rec.gaps >= -1e-12)


def test_plays_stay_interior():
    X = Domain.box([-1.0, -1.0], [1.0, 1.0])
    rec = game.run_game(game.GameConfig(np.array([[0.6, -0.3], [0.2, 0.5]]), X, X, 500), 1)
    assert np.all(np.abs(rec.xs) < 1) and np.all(np.abs(rec.ys) < 1)


def test_one_by_one_gap_decay():
    cfg = game.GameConfig(np.array([[1.0]]), UNIT, UNIT, 4096)
    gaps = np.mean([game.run_game(cfg, s).gaps for s in range(20)], axis=0)
    assert gaps[-1] <= 0.6 * gaps[-2]


def test_scripted_opponent_sqrt_regret():
    pts = []
    for T in (2**9, 2**10, 2**11, 2**12):
        cfg = game.GameConfig(np.array([[1.0]]), UNIT, UNIT, T, opponent="scripted")
        regs = [game.run_game(cfg, s).regret_x[-1] for s in range(20)]
        pts.append((T, metrics.aggregate(regs)[0]))
    assert 0.35 <= metrics.slope_fit(pts).slope <= 0.7
