"""Command-line harness: run, sweep, game, diagnose, accept.

Exit codes: 0 success, 1 acceptance failure, 2 configuration error.
``BANDITGV_THREADS`` sets the worker count for multi-seed runs.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bco2p, blo1p, ensemble, game, metrics
from ._accel import backend
from .adversary import UnsupportedFamilyError
from .config import ConfigFileError, ExperimentConfig, build_adversary, load_config
from .estimator2p import coupon_statistics, harmonic, rho_statistics
from .geometry import RNG_ALGORITHM, Domain, InputError, Rng
from .oogd import ConfigError

SCHEMA_VERSION = "1"
SUMMARY_COLUMNS = ["seed", "regret_avg", "regret_center", "VT", "VbarT", "FT", "wallclock_ms", "config_hash"]

EXIT_OK, EXIT_ACCEPT_FAIL, EXIT_CONFIG = 0, 1, 2


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _vec(name: str, d: int) -> list[str]:
    return [f"{name}{k}" for k in range(d)]


def row_header(record) -> list[str]:
    d = record.dim
    if record.algorithm == "one_point":
        return ["t", "i", "eps"] + _vec("w", d) + _vec("x", d) + ["v", "eta", "innov_sq"]
    if record.algorithm == "sphere":
        return ["t"] + _vec("u", d) + _vec("w", d) + _vec("x_plus", d) + _vec("x_minus", d) + ["f_plus", "f_minus", "v", "eta"]
    head = ["t", "i"] + _vec("w", d) + _vec("x_plus", d) + _vec("x_minus", d) + ["f_plus", "f_minus", "v", "eta", "innov_sq"]
    if record.weights is not None:
        head += _vec("p", record.weights.shape[1])
    return head


def record_rows(record):
    for t in range(record.horizon):
        w = list(record.centers[t])
        if record.algorithm == "one_point":
            yield [t + 1, int(record.coords[t]) + 1, int(record.signs[t])] + w + list(record.plays[t, 0]) + [
                record.v[t], record.eta[t], record.innov_sq[t]]
        elif record.algorithm == "sphere":
            yield [t + 1] + list(record.directions[t]) + w + list(record.plays[t, 0]) + list(record.plays[t, 1]) + [
                record.values[t, 0], record.values[t, 1], record.v[t], record.eta[t]]
        else:
            row = [t + 1, int(record.coords[t]) + 1] + w + list(record.plays[t, 0]) + list(record.plays[t, 1]) + [
                record.values[t, 0], record.values[t, 1], record.v[t], record.eta[t], record.innov_sq[t]]
            if record.weights is not None:
                row += list(record.weights[t])
            yield row


def run_single(cfg: ExperimentConfig, T: int, seed: int, adversary=None):
    algo = cfg.get("algorithm", "gv_convex")
    adversary = adversary if adversary is not None else build_adversary(cfg, T)
    ov = cfg.overrides
    if algo in bco2p.VARIANTS:
        rec = bco2p.run_two_point(algo, adversary, T, seed, ov)
    elif algo == "sphere":
        rec = bco2p.run_sphere_sgd(adversary, T, seed, ov)
    elif algo == "one_point":
        rec = blo1p.run_one_point(adversary, T, seed, ov)
    elif algo == "dynamic":
        rec = ensemble.run_dynamic(adversary, T, seed, ov)
    elif algo == "universal":
        rec = ensemble.run_universal(adversary, T, seed, ov)
    else:  # pragma: no cover - rejected by the parser
        raise ConfigError(f"unknown algorithm {algo!r}")
    rec.config_hash = cfg.config_hash
    return rec


def _workers() -> int:
    raw = os.environ.get("BANDITGV_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, min(8, os.cpu_count() or 1))


def _run_many(cfg: ExperimentConfig, T: int):
    adversary = build_adversary(cfg, T)
    seeds = cfg.seed_list

    def job(seed):
        start = time.perf_counter()
        rec = run_single(cfg, T, seed, adversary)
        return rec, (time.perf_counter() - start) * 1000.0

    # Summaries memoise oracle results on the shared adversary; warm them first.
    adversary.best_fixed(0.0)
    adversary.per_round_mins()
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        return list(pool.map(job, seeds))


def _summary_row(rec, ms, with_clock: bool):
    s = rec.summary
    return [rec.seed, s["regret_avg"], s["regret_center"], s["VT"], s["VbarT"], s["FT"], fmt(ms) if with_clock else "", rec.config_hash]


def _outdir(cfg: ExperimentConfig, override) -> Path:
    out = Path(override or cfg.get("output.dir", "banditgv_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_info(out: Path, cfg: ExperimentConfig) -> None:
    lines = [
        f"schema_version = {SCHEMA_VERSION}",
        f"config_hash = {cfg.config_hash}",
        f"rng = {RNG_ALGORITHM}",
        f"backend = {backend()}",
    ]
    (out / "run_info.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(cfg, args.out)
    clock = bool(cfg.get("output.wallclock", False))
    _write_info(out, cfg)
    multi = len(cfg.horizons) > 1
    for T in cfg.horizons:
        results = _run_many(cfg, T)
        suffix = f"_T{T}" if multi else ""
        for rec, _ in results:
            _write_csv(out / f"rows{suffix}_seed{rec.seed}.csv", row_header(rec), record_rows(rec))
        _write_csv(out / f"summary{suffix}.csv", SUMMARY_COLUMNS, [_summary_row(r, ms, clock) for r, ms in results])
        mean, se = metrics.aggregate([r.summary["regret_center"] for r, _ in results])
        print(f"T={T} seeds={len(results)} regret_center={mean:.6g} +/- {se:.3g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(cfg, args.out)
    _write_info(out, cfg)
    if len(cfg.horizons) < 3:
        raise ConfigFileError("sweeps need at least three horizons in T")
    table, pts_c, pts_a = [], [], []
    for T in cfg.horizons:
        results = _run_many(cfg, T)
        mc, sc = metrics.aggregate([r.summary["regret_center"] for r, _ in results])
        ma, sa = metrics.aggregate([r.summary["regret_avg"] for r, _ in results])
        table.append([T, len(results), mc, sc, ma, sa])
        pts_c.append((T, mc))
        pts_a.append((T, ma))
    _write_csv(out / "sweep.csv", ["T", "seeds", "mean_regret_center", "se_regret_center", "mean_regret_avg", "se_regret_avg"], table)
    fits = []
    for name, pts in (("regret_center", pts_c), ("regret_avg", pts_a)):
        try:
            f = metrics.slope_fit(pts)
            fits.append([name, f.slope, f.half_width, f.used])
        except ValueError:
            fits.append([name, float("nan"), float("nan"), 0])
    _write_csv(out / "slope.csv", ["metric", "slope", "half_width", "points"], fits)
    for row in fits:
        print(f"{row[0]}: slope {fmt(row[1])} +/- {fmt(row[2])}")
    return EXIT_OK


def _game_config(cfg: ExperimentConfig, T: int) -> game.GameConfig:
    A = cfg.get("game.A")
    if A is None:
        raise ConfigFileError("game runs need game.A")
    m, n = A.shape
    X = Domain.box(cfg.get("game.x_lower", -np.ones(m)), cfg.get("game.x_upper", np.ones(m)))
    Y = Domain.box(cfg.get("game.y_lower", -np.ones(n)), cfg.get("game.y_upper", np.ones(n)))
    return game.GameConfig(
        A, X, Y, T, cfg.seed_list, cfg.get("game.eta_x"), cfg.get("game.eta_y"),
        cfg.get("game.opponent", "learner"), cfg.get("game.script", "sqrt_walk"),
        cfg.get("adversary.seed", 0), cfg.get("overrides.tol"),
    )


def cmd_game(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(cfg, args.out)
    _write_info(out, cfg)
    rows = []
    for T in cfg.horizons:
        gcfg = _game_config(cfg, T)
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            recs = list(pool.map(lambda s: game.run_game(gcfg, s), gcfg.seeds))
        for rec in recs:
            for c, g, rx, ry in zip(rec.checkpoints, rec.gaps, rec.regret_x, rec.regret_y):
                rows.append([T, rec.seed, c, g, rx, ry])
        mean_gap = np.mean([r.gaps[-1] for r in recs])
        print(f"T={T} mean final gap {mean_gap:.6g}")
    _write_csv(out / "gaps.csv", ["T", "seed", "t", "gap", "regret_x", "regret_y"], rows)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for d in args.d:
        hits, colls, rhos, maxes = [], [], [], []
        for trial in range(args.trials):
            coords = Rng(args.seed + trial).coordinates(d, args.T)
            c = coupon_statistics(coords, d)
            r = rho_statistics(coords, d)
            hits.append(c.mean_first_hit)
            colls.append(c.mean_collection)
            rhos.append(r.mean_rho)
            maxes.append(r.mean_max_rho)
        lnd = np.log(d) if d > 1 else float("nan")
        row = [d, args.T, args.trials, np.mean(hits), d, np.mean(colls), d * harmonic(d), np.mean(rhos), 2 * d, np.mean(maxes), 4 * d * lnd]
        rows.append(row)
        print(f"d={d}: first-hit {row[3]:.4f} (exp {d}), collection {row[5]:.4f} (exp {row[6]:.4f}), "
              f"E[rho] {row[7]:.4f} (<= {2 * d}), E[max rho] {row[9]:.4f} (<= {row[10]:.4f})")
    header = ["d", "T", "trials", "mean_first_hit", "expected_first_hit", "mean_collection", "expected_collection",
              "mean_rho", "rho_bound", "mean_max_rho", "max_rho_bound"]
    _write_csv(out / "diagnose.csv", header, rows)
    return EXIT_OK


def cmd_accept(args) -> int:
    from . import acceptance

    results = acceptance.run_all(only=args.only)
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="banditgv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("game", cmd_game)):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("diagnose", help="sampling-gap and coupon-collector statistics")
    sp.add_argument("--d", type=int, nargs="+", default=[3, 5, 10])
    sp.add_argument("--T", type=int, default=100_000)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_diagnose)
    sp = sub.add_parser("accept", help="run the acceptance suite")
    sp.add_argument("--only", type=int, nargs="*", default=None, help="criterion numbers to run")
    sp.set_defaults(func=cmd_accept)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigFileError, ConfigError, InputError, UnsupportedFamilyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
