import os
import subprocess
import sys

import numpy as np
import pytest

SCRIPT = r"""
import sys
import numpy as np
from banditgv import adversary as adv, bco2p, blo1p, ensemble, game
from banditgv._accel import backend
from banditgv.geometry import Domain

ball = Domain.ball(1.0, 2)
box = Domain.box([-1.0, -1.0], [1.0, 1.0])
T = 150
sq = adv.drifting_strong_quadratic(T, ball, 0.5, [0.3, 0.1], [0.0, 1.0], 0.3, "random", seed=7)
lin = adv.drifting_linear(T, box, [0.1, 0.0], [1.0, 0.5], 0.8, "random", seed=2)
out = {"backend": np.array(backend())}
for v in bco2p.VARIANTS:
    out[v] = bco2p.run_two_point(v, sq, seed=1, summarize=False).centers
out["sphere"] = bco2p.run_sphere_sgd(sq, seed=1, summarize=False).centers
out["one_point"] = blo1p.run_one_point(lin, seed=1, summarize=False).centers
out["dynamic"] = ensemble.run_dynamic(sq, seed=1, summarize=False).weights
out["universal"] = ensemble.run_universal(sq, seed=1, summarize=False).weights
cfg = game.GameConfig(np.array([[0.6, -0.3], [0.2, 0.5]]), box, box, T)
out["game"] = game.run_game(cfg, 1).xs
np.savez(sys.argv[1], **out)
"""


def _run(path, jit):
    env = dict(os.environ, BANDITGV_JIT=jit)
    subprocess.run([sys.executable, "-c", SCRIPT, str(path)], check=True, env=env)
    return np.load(path)


@pytest.mark.slow
def test_numba_and_python_paths_agree(tmp_path):
    fast = _run(tmp_path / "fast.npz", "1")
    pure = _run(tmp_path / "pure.npz", "0")
    assert str(fast["backend"]) == "numba" and str(pure["backend"]) == "python"
    for key in fast.files:
        if key == "backend":
            continue
        assert np.allclose(fast[key], pure[key], rtol=1e-10, atol=1e-12), key
