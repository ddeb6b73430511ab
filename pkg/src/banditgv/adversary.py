"""Synthetic loss sequences.

Every family is stored in one normal form,

    f_t(x) = 0.5 * x^T A x + <b_t, x> + c_t,

with the curvature ``A`` shared by all rounds.  Consecutive gradient
differences are then ``b_t - b_{t-1}``, independent of ``x``, which is what
makes the gradient variation exact.

Learners only ever receive a :class:`BanditOracle` (values only); the
gradient, variation and comparator oracles are for metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import jit
from .geometry import Domain, InputError, project

FAMILIES = (
    "stationary_linear",
    "linear_drift",
    "quadratic_drift",
    "strong_quadratic",
    "piecewise",
)


class UnsupportedFamilyError(ValueError):
    """A requested oracle has no closed form for this family."""


@jit
def value_kernel(A, B, C, t, x):
    """f_t(x) with 0-based round ``t``; plain loops keep both backends identical."""
    d = x.shape[0]
    quad = 0.0
    for r in range(d):
        acc = 0.0
        for c in range(d):
            acc += A[r, c] * x[c]
        quad += x[r] * acc
    lin = 0.0
    for r in range(d):
        lin += B[t, r] * x[r]
    return 0.5 * quad + lin + C[t]


def _op_norm(A: np.ndarray) -> float:
    if not np.any(A):
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (A + A.T)))))


def _min_eig(A: np.ndarray) -> float:
    if not np.any(A):
        return 0.0
    return float(max(0.0, np.min(np.linalg.eigvalsh(0.5 * (A + A.T)))))


def minimize_quadratic(A, b, proj, x0, tol: float = 1e-10, max_iter: int = 200_000):
    """Minimise 0.5 x^T A x + <b, x> over a convex set given its projection.

    Projected gradient with step 1/||A||, stopped once an iterate moves by
    less than ``tol``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x = proj(np.asarray(x0, dtype=float))
    Lam = _op_norm(A)
    if Lam == 0.0:
        raise UnsupportedFamilyError("linear objective: use vertex selection instead")
    step = 1.0 / Lam
    for _ in range(max_iter):
        nxt = proj(x - step * (A @ x + b))
        if np.linalg.norm(nxt - x) <= tol * 1e-2:
            return nxt
        x = nxt
    return x


ADVERSARY_STREAM = 1


def sign_pattern(T: int, kind: str, seed: int = 0, exponent: float = 1.0) -> np.ndarray:
    """Sign sequences used to build drifting adversaries.

    ``constant`` gives V_T = 0; ``alternating`` and ``sqrt_walk`` flip sign on
    a constant fraction of rounds (V_T = Theta(T)); ``random`` draws iid signs;
    ``blocks`` uses about T**exponent random-sign blocks, so exponent 0.5
    targets V_T = Theta(sqrt(T)).  ``sqrt_walk`` keeps the running sum close
    to sqrt(t), which makes the best fixed point gain about sqrt(T).
    """
    if T < 0:
        raise InputError("T must be non-negative")
    if kind == "constant":
        return np.ones(T)
    if kind == "alternating":
        return np.where(np.arange(T) % 2 == 0, 1.0, -1.0)
    if kind == "sqrt_walk":
        s = np.empty(T)
        run = 0.0
        for t in range(T):
            s[t] = 1.0 if run < np.sqrt(t + 1.0) else -1.0
            run += s[t]
        return s
    # separate spawn key: a learner seeded with the same integer must not
    # share this stream
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(ADVERSARY_STREAM,))))
    if kind == "random":
        return 2.0 * rng.integers(0, 2, size=T) - 1.0
    if kind == "blocks":
        k = int(max(1, min(T, round(T**exponent)))) if T else 0
        if k == 0:
            return np.ones(0)
        signs = 2.0 * rng.integers(0, 2, size=k) - 1.0
        edges = np.linspace(0, T, k + 1).astype(int)
        return np.repeat(signs, np.diff(edges))
    raise InputError(f"unknown sign pattern {kind!r}")


@dataclass(frozen=True)
class BanditOracle:
    """The only view of an adversary that learners receive."""

    curvature: np.ndarray
    linear: np.ndarray
    offset: np.ndarray

    @property
    def horizon(self) -> int:
        return self.linear.shape[0]

    def value(self, t: int, x) -> float:
        if not 1 <= t <= self.horizon:
            raise InputError(f"round {t} outside 1..{self.horizon}")
        return float(value_kernel(self.curvature, self.linear, self.offset, t - 1, np.asarray(x, dtype=float)))


@dataclass(eq=False)
class LossSequence:
    family: str
    curvature: np.ndarray
    linear: np.ndarray
    offset: np.ndarray
    domain: Domain
    G: float
    L: float
    lam: float
    segments: list = field(default_factory=list)
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def horizon(self) -> int:
        return self.linear.shape[0]

    @property
    def dim(self) -> int:
        return self.curvature.shape[0]

    @property
    def is_linear(self) -> bool:
        return not np.any(self.curvature)

    def bandit_view(self) -> BanditOracle:
        return BanditOracle(self.curvature, self.linear, self.offset)

    def _check_round(self, t: int) -> None:
        if not 1 <= t <= self.horizon:
            raise InputError(f"round {t} outside 1..{self.horizon}")

    def value(self, t: int, x) -> float:
        self._check_round(t)
        x = np.asarray(x, dtype=float)
        return float(value_kernel(self.curvature, self.linear, self.offset, t - 1, x))

    def values(self, points) -> np.ndarray:
        """f_t(points[t-1]) for every round (vectorised)."""
        P = np.asarray(points, dtype=float)
        quad = 0.5 * np.einsum("ti,ij,tj->t", P, self.curvature, P)
        return quad + np.einsum("ti,ti->t", self.linear[: P.shape[0]], P) + self.offset[: P.shape[0]]

    def gradient(self, t: int, x) -> np.ndarray:
        self._check_round(t)
        return self.curvature @ np.asarray(x, dtype=float) + self.linear[t - 1]

    def gradient_variation(self) -> float:
        if self.horizon < 2:
            return 0.0
        diff = np.diff(self.linear, axis=0)
        return float(np.sum(diff * diff))

    def mean_deviation(self) -> float:
        """W_T for linear families: sum ||l_t - mean||^2."""
        if not self.is_linear:
            raise UnsupportedFamilyError("W_T has a closed form only for linear families")
        if self.horizon == 0:
            return 0.0
        dev = self.linear - self.linear.mean(axis=0)
        return float(np.sum(dev * dev))

    # -- comparators -------------------------------------------------------

    def inflation(self) -> float:
        return self.G / self.L if self.L > 0 else 0.0

    def _inflated_projection(self, rho: float):
        dom = self.domain
        if dom.is_ball:
            big = Domain.ball(dom.radius + rho, dom.dim)
            return lambda x: project(big, 0.0, x)

        def proj(x):
            p = np.clip(x, dom.lower, dom.upper)
            gap = np.linalg.norm(x - p)
            if gap <= rho:
                return np.array(x, dtype=float)
            return p + (rho / gap) * (x - p)

        return proj

    def per_round_mins(self, inflation: float | None = None) -> np.ndarray:
        """min over X+ of f_t for every round, X+ = X inflated by a ball."""
        rho = self.inflation() if inflation is None else float(inflation)
        key = ("per_round_mins", rho)
        if key not in self._memo:
            self._memo[key] = self._per_round_mins(rho)
        return self._memo[key].copy()

    def _per_round_mins(self, rho: float) -> np.ndarray:
        dom, B, C = self.domain, self.linear, self.offset
        if self.is_linear:
            norms = np.linalg.norm(B, axis=1)
            if dom.is_ball:
                return C - (dom.radius + rho) * norms
            lo = np.minimum(B * dom.lower, B * dom.upper).sum(axis=1)
            return C + lo - rho * norms
        proj = self._inflated_projection(rho)
        A = self.curvature
        a0 = A[0, 0]
        iso = np.array_equal(A, a0 * np.eye(self.dim)) and a0 > 0
        out = np.empty(self.horizon)
        x = np.zeros(self.dim)
        for t in range(self.horizon):
            if iso:
                x = proj(-B[t] / a0)
            else:
                x = minimize_quadratic(A, B[t], proj, x)
            out[t] = float(value_kernel(A, B, C, t, x))
        return out

    def per_round_min(self, t: int, inflation: float | None = None) -> float:
        self._check_round(t)
        return float(self.per_round_mins(inflation)[t - 1])

    def best_fixed(self, shrink: float = 0.0) -> tuple[np.ndarray, float]:
        """Minimiser of sum_t f_t over (1 - shrink) X and the minimal total."""
        key = ("best_fixed", float(shrink))
        if key not in self._memo:
            self._memo[key] = _best_fixed(self.curvature, self.linear, self.offset, self.domain, shrink)
        x, total = self._memo[key]
        return x.copy(), total

    def comparators(self) -> np.ndarray:
        """Per-round comparator u_t: segment minimisers (one segment if stationary)."""
        U = np.empty((self.horizon, self.dim))
        segs = self.segments or [(0, self.horizon)]
        for start, stop in segs:
            x, _ = _best_fixed(
                self.curvature, self.linear[start:stop], self.offset[start:stop], self.domain, 0.0
            )
            U[start:stop] = x
        return U


def _best_fixed(A, B, C, domain: Domain, shrink: float):
    T, d = B.shape
    total_b = B.sum(axis=0)
    const = float(C.sum())
    s = 1.0 - shrink
    if not np.any(A):
        if domain.is_ball:
            nrm = np.linalg.norm(total_b)
            x = np.zeros(d) if nrm == 0.0 else -s * domain.radius * total_b / nrm
        else:
            x = np.where(total_b > 0, s * domain.lower, np.where(total_b < 0, s * domain.upper, 0.0))
            x = np.clip(x, s * domain.lower, s * domain.upper)
        return x, float(total_b @ x) + const
    if T == 0:
        return project(domain, shrink, np.zeros(d)), 0.0
    proj = lambda y: project(domain, shrink, y)  # noqa: E731
    a0 = A[0, 0]
    if np.array_equal(A, a0 * np.eye(d)) and a0 > 0:
        x = proj(-total_b / (T * a0))
    else:
        x = minimize_quadratic(T * A, total_b, proj, np.zeros(d))
    total = 0.5 * T * float(x @ A @ x) + float(total_b @ x) + const
    return x, total


def _finish(family, A, B, C, domain, segments=None) -> LossSequence:
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    C = np.ascontiguousarray(C, dtype=float)
    d = domain.dim
    if A.shape != (d, d) or B.ndim != 2 or B.shape[1] != d or C.shape != (B.shape[0],):
        raise InputError("adversary dimensions do not match the domain")
    if not np.allclose(A, A.T):
        raise InputError("curvature matrix must be symmetric")
    if np.min(np.linalg.eigvalsh(A)) < -1e-12:
        raise InputError("curvature matrix must be positive semidefinite")
    op = _op_norm(A)
    bmax = float(np.max(np.linalg.norm(B, axis=1))) if B.shape[0] else 0.0
    G = op * domain.circumradius + bmax
    # Smoothness is declared as max(||A||, 1), a valid upper bound.
    L = max(op, 1.0)
    return LossSequence(family, A, B, C, domain, G, L, _min_eig(A), list(segments or []))


def stationary_linear(loss, T: int, domain: Domain) -> LossSequence:
    loss = np.asarray(loss, dtype=float)
    d = loss.size
    return _finish("stationary_linear", np.zeros((d, d)), np.tile(loss, (T, 1)), np.zeros(T), domain)


def linear_drift(losses, domain: Domain) -> LossSequence:
    B = np.asarray(losses, dtype=float)
    d = domain.dim
    return _finish("linear_drift", np.zeros((d, d)), B.reshape(-1, d), np.zeros(B.shape[0]), domain)


def drifting_linear(
    T: int,
    domain: Domain,
    base,
    direction,
    amplitude: float,
    pattern: str = "sqrt_walk",
    seed: int = 0,
    exponent: float = 1.0,
) -> LossSequence:
    """l_t = base + amplitude * s_t * direction for a sign pattern s_t."""
    s = sign_pattern(T, pattern, seed, exponent)
    B = np.asarray(base, float)[None, :] + amplitude * s[:, None] * np.asarray(direction, float)[None, :]
    return linear_drift(B, domain)


def quadratic_drift(A, b_seq, domain: Domain) -> LossSequence:
    B = np.asarray(b_seq, dtype=float).reshape(-1, domain.dim)
    return _finish("quadratic_drift", A, B, np.zeros(B.shape[0]), domain)


def strong_quadratic(lam: float, centers, domain: Domain) -> LossSequence:
    """f_t(x) = (lam/2) ||x - c_t||^2."""
    if not lam > 0:
        raise InputError("strong convexity lam must be positive")
    Cs = np.asarray(centers, dtype=float).reshape(-1, domain.dim)
    A = lam * np.eye(domain.dim)
    return _finish("strong_quadratic", A, -lam * Cs, 0.5 * lam * np.sum(Cs * Cs, axis=1), domain)


def drifting_strong_quadratic(
    T: int,
    domain: Domain,
    lam: float,
    center,
    direction,
    amplitude: float,
    pattern: str = "random",
    seed: int = 0,
    exponent: float = 1.0,
) -> LossSequence:
    s = sign_pattern(T, pattern, seed, exponent)
    Cs = np.asarray(center, float)[None, :] + amplitude * s[:, None] * np.asarray(direction, float)[None, :]
    return strong_quadratic(lam, Cs, domain)


def piecewise(parts) -> LossSequence:
    """Concatenate stationary pieces that share domain and curvature."""
    parts = list(parts)
    if not parts:
        raise InputError("piecewise adversary needs at least one segment")
    first = parts[0]
    for p in parts[1:]:
        if p.domain is not first.domain and not (
            p.domain.kind == first.domain.kind
            and np.array_equal(p.domain.lower, first.domain.lower)
            and np.array_equal(p.domain.upper, first.domain.upper)
            and p.domain.radius == first.domain.radius
        ):
            raise InputError("all segments must share the domain")
        if not np.array_equal(p.curvature, first.curvature):
            raise UnsupportedFamilyError("segments with different curvature have no closed-form V_T")
    segments, start = [], 0
    for p in parts:
        segments.append((start, start + p.horizon))
        start += p.horizon
    B = np.concatenate([p.linear for p in parts])
    C = np.concatenate([p.offset for p in parts])
    return _finish("piecewise", first.curvature, B, C, first.domain, segments)
