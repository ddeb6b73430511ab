import csv
import hashlib

import numpy as np
import pytest

from banditgv import cli
from banditgv.config import ConfigFileError, build_adversary, parse_config

BASE = """\
algorithm = gv_convex
T = 300
seeds = 2
domain.kind = ball
domain.dim = 2
adversary.family = stationary_linear
adversary.loss = 1,0
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def test_parse_basic():
    cfg = parse_config(BASE + "overrides.eta = 0.05  # fixed step\n")
    assert cfg.horizons == [300] and cfg.seed_list == [0, 1]
    assert cfg.overrides == {"eta": 0.05}
    assert np.array_equal(cfg.get("adversary.loss"), [1.0, 0.0])
    assert parse_config(BASE.replace("seeds = 2", "seeds = 4,9")).seed_list == [4, 9]


def test_parse_errors_name_line_and_key():
    with pytest.raises(ConfigFileError, match=r":3: unknown key 'bogus'"):
        parse_config("algorithm = gv_convex\nT = 5\nbogus = 1\n")
    with pytest.raises(ConfigFileError, match="duplicate key 'T'"):
        parse_config("T = 5\nT = 6\n")
    with pytest.raises(ConfigFileError, match="bad value"):
        parse_config("T = five\n")
    with pytest.raises(ConfigFileError, match="unknown algorithm"):
        parse_config("algorithm = magic\n")


def test_config_hash_ignores_output_keys():
    a = parse_config(BASE)
    b = parse_config(BASE + "output.dir = elsewhere\n")
    c = parse_config(BASE.replace("T = 300", "T = 301"))
    assert a.config_hash == b.config_hash != c.config_hash
    canon = "\n".join(f"{k} = {a.raw[k]}" for k in sorted(a.raw))
    assert a.config_hash == hashlib.sha256(canon.encode()).hexdigest()[:16]


@pytest.mark.parametrize("family,extra", [
    ("stationary_linear", ""),
    ("linear_drift", "adversary.direction = 0,1\nadversary.pattern = random\n"),
    ("strong_quadratic", "adversary.lambda = 0.5\nadversary.center = 0.1,0.2\n"),
    ("quadratic_drift", "adversary.curvature = 1,0;0,0\n"),
    ("piecewise", "adversary.segments = 1,0;0,1\n"),
])
def test_adversary_families(family, extra):
    text = BASE.replace("stationary_linear", family).replace("adversary.loss = 1,0\n", "") + extra
    seq = build_adversary(parse_config(text), 40)
    assert seq.horizon == 40 and seq.dim == 2


def test_run_outputs_and_headers(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", _write(tmp_path, BASE), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["rows_seed0.csv", "rows_seed1.csv", "run_info.txt", "summary.csv"]
    assert _header(out / "summary.csv") == ["seed", "regret_avg", "regret_center", "VT", "VbarT", "FT", "wallclock_ms", "config_hash"]
    assert _header(out / "rows_seed0.csv") == [
        "t", "i", "w0", "w1", "x_plus0", "x_plus1", "x_minus0", "x_minus1", "f_plus", "f_minus", "v", "eta", "innov_sq",
    ]
    with open(out / "rows_seed0.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 300 and rows[0]["t"] == "1" and {r["i"] for r in rows} <= {"1", "2"}
    info = (out / "run_info.txt").read_text()
    assert "rng = numpy.random.PCG64" in info and "schema_version = 1" in info


def test_row_headers_other_algorithms(tmp_path):
    box = "domain.kind = box\ndomain.lower = -1,-1\ndomain.upper = 1,1\n"
    one = BASE.replace("gv_convex", "one_point").replace("domain.kind = ball\ndomain.dim = 2\n", box)
    out = tmp_path / "one"
    assert cli.main(["run", _write(tmp_path, one, "one.cfg"), "--out", str(out)]) == 0
    assert _header(out / "rows_seed0.csv") == ["t", "i", "eps", "w0", "w1", "x0", "x1", "v", "eta", "innov_sq"]
    sph = BASE.replace("gv_convex", "sphere").replace("stationary_linear", "strong_quadratic").replace(
        "adversary.loss = 1,0", "adversary.lambda = 1\nadversary.center = 0.2,0")
    out = tmp_path / "sph"
    assert cli.main(["run", _write(tmp_path, sph, "sph.cfg"), "--out", str(out)]) == 0
    assert _header(out / "rows_seed0.csv") == [
        "t", "u0", "u1", "w0", "w1", "x_plus0", "x_plus1", "x_minus0", "x_minus1", "f_plus", "f_minus", "v", "eta",
    ]
    dyn = BASE.replace("gv_convex", "universal")
    out = tmp_path / "uni"
    assert cli.main(["run", _write(tmp_path, dyn, "uni.cfg"), "--out", str(out)]) == 0
    head = _header(out / "rows_seed0.csv")
    assert head[:13] == ["t", "i", "w0", "w1", "x_plus0", "x_plus1", "x_minus0", "x_minus1", "f_plus", "f_minus", "v", "eta", "innov_sq"]
    assert head[13:] == [f"p{j}" for j in range(len(head) - 13)] and len(head) > 13


def test_reruns_byte_identical(tmp_path):
    path = _write(tmp_path, BASE)
    for k in ("a", "b"):
        assert cli.main(["run", path, "--out", str(tmp_path / k)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_unknown_key_exit_code(tmp_path, capsys):
    assert cli.main(["run", _write(tmp_path, BASE + "mystery = 3\n"), "--out", str(tmp_path / "x")]) == 2
    assert "mystery" in capsys.readouterr().err


def test_sweep(tmp_path):
    text = BASE.replace("T = 300", "T = 256,512,1024").replace("stationary_linear", "linear_drift").replace(
        "adversary.loss = 1,0", "adversary.direction = 1,0")
    out = tmp_path / "sw"
    assert cli.main(["sweep", _write(tmp_path, text), "--out", str(out)]) == 0
    assert _header(out / "sweep.csv") == ["T", "seeds", "mean_regret_center", "se_regret_center", "mean_regret_avg", "se_regret_avg"]
    assert _header(out / "slope.csv") == ["metric", "slope", "half_width", "points"]
    assert cli.main(["sweep", _write(tmp_path, BASE, "short.cfg"), "--out", str(out)]) == 2


def test_game_command(tmp_path):
    text = "T = 128\nseeds = 2\ngame.A = 1\ngame.x_lower = -1\ngame.x_upper = 1\ngame.y_lower = -1\ngame.y_upper = 1\n"
    out = tmp_path / "g"
    assert cli.main(["game", _write(tmp_path, text), "--out", str(out)]) == 0
    assert _header(out / "gaps.csv") == ["T", "seed", "t", "gap", "regret_x", "regret_y"]
    bad = text.replace("game.A = 1", "game.A = 3")
    assert cli.main(["game", _write(tmp_path, bad, "bad.cfg"), "--out", str(out)]) == 2


def test_diagnose_d3(tmp_path):
    out = tmp_path / "dg"
    assert cli.main(["diagnose", "--d", "3", "--T", "100000", "--trials", "1", "--out", str(out)]) == 0
    with open(out / "diagnose.csv") as fh:
        row = next(csv.DictReader(fh))
    assert abs(float(row["mean_collection"]) - 5.5) <= 0.275
