"""Feasible domains, shrinkage, projection and random draws."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import jit

# Generator identity is part of the reproducibility contract.
RNG_ALGORITHM = "numpy.random.PCG64"


class InputError(ValueError):
    """Raised for malformed arguments (dimension mismatch, bad ranges)."""


@dataclass(frozen=True, eq=False)
class Domain:
    """A Euclidean ball centred at the origin or an axis-aligned box.

    ``circumradius`` is max ||x|| over the set and ``inradius`` the radius of
    the largest origin-centred ball inside it (0 if the origin is not
    interior).
    """

    kind: str
    dim: int
    radius: float = 0.0
    lower: np.ndarray = field(default=None)
    upper: np.ndarray = field(default=None)

    @classmethod
    def ball(cls, radius: float, dim: int) -> "Domain":
        if not radius > 0:
            raise InputError("ball radius must be positive")
        if dim < 1:
            raise InputError("dimension must be positive")
        z = np.zeros(dim)
        return cls("ball", int(dim), float(radius), z, z)

    @classmethod
    def box(cls, lower, upper) -> "Domain":
        lo = np.asarray(lower, dtype=float).ravel().copy()
        hi = np.asarray(upper, dtype=float).ravel().copy()
        if lo.shape != hi.shape or lo.size == 0:
            raise InputError("box bounds must be non-empty and of equal length")
        if not np.all(lo < hi):
            raise InputError("box requires lower[i] < upper[i] for every i")
        lo.setflags(write=False)
        hi.setflags(write=False)
        return cls("box", lo.size, 0.0, lo, hi)

    @property
    def is_ball(self) -> bool:
        return self.kind == "ball"

    @property
    def circumradius(self) -> float:
        if self.is_ball:
            return self.radius
        return float(np.sqrt(np.sum(np.maximum(self.lower**2, self.upper**2))))

    @property
    def inradius(self) -> float:
        if self.is_ball:
            return self.radius
        return float(max(0.0, np.min(np.minimum(-self.lower, self.upper))))

    @property
    def diameter(self) -> float:
        if self.is_ball:
            return 2.0 * self.radius
        return float(np.sqrt(np.sum((self.upper - self.lower) ** 2)))

    def contains(self, x, shrink: float = 0.0, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        s = 1.0 - shrink
        if self.is_ball:
            return bool(np.linalg.norm(x) <= s * self.radius + tol)
        return bool(np.all(x >= s * self.lower - tol) and np.all(x <= s * self.upper + tol))

    def kernel_args(self):
        """Flattened description consumed by the jitted kernels."""
        return self.is_ball, float(self.radius), np.ascontiguousarray(self.lower), np.ascontiguousarray(self.upper)


@jit
def project_kernel(x, is_ball, radius, lower, upper, shrink):
    d = x.shape[0]
    out = np.empty(d)
    s = 1.0 - shrink
    if is_ball:
        nrm = 0.0
        for k in range(d):
            nrm += x[k] * x[k]
        nrm = np.sqrt(nrm)
        lim = s * radius
        if nrm > lim:
            f = lim / nrm
            for k in range(d):
                out[k] = x[k] * f
        else:
            for k in range(d):
                out[k] = x[k]
    else:
        for k in range(d):
            lo = s * lower[k]
            hi = s * upper[k]
            v = x[k]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            out[k] = v
    return out


def project(domain: Domain, shrink: float, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto ``(1 - shrink) * domain``."""
    if not 0.0 <= shrink < 1.0:
        raise InputError("shrink must lie in [0, 1)")
    x = np.asarray(x, dtype=float)
    if x.shape != (domain.dim,):
        raise InputError(f"expected a vector of length {domain.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("cannot project a non-finite vector")
    return project_kernel(x, *domain.kernel_args(), float(shrink))


class Rng:
    """Seeded PCG64 stream; the seed is kept so records can cite it."""

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def coordinates(self, d: int, n: int) -> np.ndarray:
        """``n`` uniform 0-based coordinate indices."""
        return self.generator.integers(0, d, size=n, dtype=np.int64)

    def signs(self, n: int) -> np.ndarray:
        return 2.0 * self.generator.integers(0, 2, size=n, dtype=np.int64) - 1.0

    def unit_vectors(self, d: int, n: int) -> np.ndarray:
        z = self.generator.standard_normal((n, d))
        nrm = np.linalg.norm(z, axis=1)
        # A zero Gaussian draw has probability zero, but keep it finite.
        nrm[nrm == 0.0] = 1.0
        return z / nrm[:, None]


def sample_coordinate(rng: Rng, d: int) -> int:
    """Uniform coordinate in ``0..d-1`` (0-based)."""
    if d < 1:
        raise InputError("d must be positive")
    return int(rng.coordinates(d, 1)[0])


def sample_sign(rng: Rng) -> int:
    return int(rng.signs(1)[0])


def sample_unit_sphere(rng: Rng, d: int) -> np.ndarray:
    if d < 1:
        raise InputError("d must be positive")
    return rng.unit_vectors(d, 1)[0]
