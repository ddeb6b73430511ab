"""Time the hot kernels under numba and under the plain-Python fallback.

The backend is fixed at import time, so each backend runs in its own
interpreter.  Numba timings exclude the first (compiling) call.

    python3 benchmarks/bench_kernels.py --T 2000 --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from banditgv import adversary as adv, bco2p, blo1p, ensemble, game
from banditgv._accel import backend
from banditgv.geometry import Domain

T, repeat = int(sys.argv[1]), int(sys.argv[2])
ball = Domain.ball(1.0, 2)
box = Domain.box([-1.0, -1.0], [1.0, 1.0])
sq = adv.drifting_strong_quadratic(T, ball, 0.5, [0.3, 0.1], [0.0, 1.0], 0.3, "random", seed=7)
lin = adv.drifting_linear(T, box, [0.0, 0.0], [1.0, 0.0], 1.0, "sqrt_walk")
cfg = game.GameConfig(np.array([[0.6, -0.3], [0.2, 0.5]]), box, box, T)
jobs = {
    "two_point": lambda: bco2p.run_two_point("gv_convex", sq, seed=0, summarize=False),
    "sphere": lambda: bco2p.run_sphere_sgd(sq, seed=0, summarize=False),
    "one_point": lambda: blo1p.run_one_point(lin, seed=0, summarize=False),
    "dynamic": lambda: ensemble.run_dynamic(sq, seed=0, summarize=False),
    "universal": lambda: ensemble.run_universal(sq, seed=0, summarize=False),
    "game": lambda: game.run_game(cfg, 0),
}
out = {"backend": backend(), "times": {}}
for name, job in jobs.items():
    job()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        job()
        best = min(best, time.perf_counter() - t0)
    out["times"][name] = best
print(json.dumps(out))
"""


def run(flag, T, repeat):
    env = dict(os.environ, BANDITGV_JIT=flag)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(T), str(repeat)], env=env, check=True,
                          capture_output=True, text=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run("1", args.T, args.repeat)
    slow = run("0", args.T, args.repeat)
    print(f"T={args.T}, best of {args.repeat}")
    print(f"{'kernel':<12}{'numba s':>12}{'python s':>12}{'speedup':>10}")
    for name, t in fast["times"].items():
        p = slow["times"][name]
        print(f"{name:<12}{t:>12.4f}{p:>12.4f}{p / t:>10.1f}")


if __name__ == "__main__":
    main()
