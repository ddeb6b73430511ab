"""Optional numba acceleration for the per-round kernels.

Kernels are written in the subset of Python/numpy that numba can compile
and are wrapped with :func:`jit`.  Setting ``BANDITGV_JIT=0`` (or running
without numba installed) leaves them as ordinary Python functions, which is
slower but convenient for debugging and for cross-checking the two paths.
"""

from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _flag_enabled() -> bool:
    raw = os.environ.get("BANDITGV_JIT", "1").strip().lower()
    return raw not in {"0", "false", "no", "off"}


JIT_ENABLED = numba is not None and _flag_enabled()


def jit(fn):
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return "numba" if JIT_ENABLED else "python"
