"""Plain-text experiment configuration.

One ``key = value`` pair per line, ``#`` starts a comment, dotted prefixes
group keys (``adversary.family``, ``domain.kind`` ...).  Vectors are comma
separated; matrices separate rows with ``;``.  Unknown keys are rejected
with the offending line number.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import adversary as adv
from .geometry import Domain


class ConfigFileError(ValueError):
    """Malformed configuration; the message names the line and key."""


def _vector(text: str) -> np.ndarray:
    return np.array([float(p) for p in text.split(",") if p.strip()], dtype=float)


def _matrix(text: str) -> np.ndarray:
    rows = [_vector(r) for r in text.split(";") if r.strip()]
    if not rows or len({r.size for r in rows}) != 1:
        raise ValueError("matrix rows must be non-empty and of equal length")
    return np.vstack(rows)


def _int_list(text: str) -> list[int]:
    out = [int(p) for p in text.split(",") if p.strip()]
    if not out:
        raise ValueError("empty list")
    return out


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


ALGORITHMS = ("gv_convex", "gv_strongly_convex", "variance", "small_loss", "sphere", "one_point", "dynamic", "universal")

SCHEMA = {
    "algorithm": str,
    "T": _int_list,
    "seeds": _int_list,
    "domain.kind": str,
    "domain.radius": float,
    "domain.dim": int,
    "domain.lower": _vector,
    "domain.upper": _vector,
    "adversary.family": str,
    "adversary.loss": _vector,
    "adversary.direction": _vector,
    "adversary.amplitude": float,
    "adversary.pattern": str,
    "adversary.exponent": float,
    "adversary.seed": int,
    "adversary.lambda": float,
    "adversary.center": _vector,
    "adversary.curvature": _matrix,
    "adversary.segments": _matrix,
    "overrides.delta": float,
    "overrides.xi": float,
    "overrides.eta": float,
    "overrides.tol": float,
    "overrides.vt": float,
    "output.dir": str,
    "output.wallclock": _bool,
    "game.A": _matrix,
    "game.x_lower": _vector,
    "game.x_upper": _vector,
    "game.y_lower": _vector,
    "game.y_upper": _vector,
    "game.opponent": str,
    "game.script": str,
    "game.eta_x": float,
    "game.eta_y": float,
}


@dataclass
class ExperimentConfig:
    values: dict
    raw: dict
    source: str = "<string>"

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def horizons(self) -> list[int]:
        return self.values.get("T", [1000])

    @property
    def seed_list(self) -> list[int]:
        """A single number is a count (seeds 0..n-1); a list is used as given."""
        seeds = self.values.get("seeds", [1])
        if len(self.raw.get("seeds", "").split(",")) == 1:
            return list(range(seeds[0]))
        return seeds

    @property
    def config_hash(self) -> str:
        canon = "\n".join(f"{k} = {self.raw[k]}" for k in sorted(self.raw) if not k.startswith("output."))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @property
    def overrides(self) -> dict:
        return {k.split(".", 1)[1]: v for k, v in self.values.items() if k.startswith("overrides.")}


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    values, raw = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigFileError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, val = (p.strip() for p in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigFileError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigFileError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigFileError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        raw[key] = val
    cfg = ExperimentConfig(values, raw, source)
    algo = cfg.get("algorithm")
    if algo is not None and algo not in ALGORITHMS:
        raise ConfigFileError(f"{source}: unknown algorithm {algo!r}")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


def build_domain(cfg: ExperimentConfig) -> Domain:
    kind = cfg.get("domain.kind", "ball")
    if kind == "ball":
        return Domain.ball(cfg.get("domain.radius", 1.0), cfg.get("domain.dim", 2))
    if kind == "box":
        if cfg.get("domain.lower") is None or cfg.get("domain.upper") is None:
            raise ConfigFileError("box domains need domain.lower and domain.upper")
        return Domain.box(cfg.get("domain.lower"), cfg.get("domain.upper"))
    raise ConfigFileError(f"unknown domain.kind {kind!r}")


def build_adversary(cfg: ExperimentConfig, T: int) -> adv.LossSequence:
    dom = build_domain(cfg)
    d = dom.dim
    family = cfg.get("adversary.family", "stationary_linear")
    e1 = np.eye(d)[0]
    loss = cfg.get("adversary.loss", e1)
    direction = cfg.get("adversary.direction", e1)
    amplitude = cfg.get("adversary.amplitude", 1.0)
    pattern = cfg.get("adversary.pattern", "sqrt_walk")
    exponent = cfg.get("adversary.exponent", 1.0)
    seed = cfg.get("adversary.seed", 0)
    if family == "stationary_linear":
        return adv.stationary_linear(loss, T, dom)
    if family == "linear_drift":
        base = cfg.get("adversary.loss", np.zeros(d))
        return adv.drifting_linear(T, dom, base, direction, amplitude, pattern, seed, exponent)
    if family == "strong_quadratic":
        center = cfg.get("adversary.center", np.zeros(d))
        return adv.drifting_strong_quadratic(
            T, dom, cfg.get("adversary.lambda", 1.0), center, direction,
            cfg.get("adversary.amplitude", 0.0), cfg.get("adversary.pattern", "constant"), seed, exponent,
        )
    if family == "quadratic_drift":
        A = cfg.get("adversary.curvature", np.eye(d))
        s = adv.sign_pattern(T, pattern, seed, exponent)
        base = cfg.get("adversary.loss", np.zeros(d))
        B = base[None, :] + amplitude * s[:, None] * direction[None, :]
        return adv.quadratic_drift(A, B, dom)
    if family == "piecewise":
        segs = cfg.get("adversary.segments")
        if segs is None:
            raise ConfigFileError("piecewise adversaries need adversary.segments")
        k = segs.shape[0]
        edges = np.linspace(0, T, k + 1).astype(int)
        parts = [adv.stationary_linear(segs[j], int(edges[j + 1] - edges[j]), dom) for j in range(k)]
        return adv.piecewise(parts)
    raise ConfigFileError(f"unknown adversary.family {family!r}")
