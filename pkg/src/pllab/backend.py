"""Execution backend switch: numba kernels vs. the pure-numpy path.

Monte-Carlo heavy solver loops dispatch to ``@njit`` kernels when (a) the
active backend is ``"numba"`` and (b) the problem carries quadratic
structure the kernels understand. Everything else runs the generic numpy
path, which is also the semantic reference.

Selection order:

1. ``set_backend()`` / ``use_backend()`` override, if any;
2. the ``PLLAB_BACKEND`` environment variable (``numba``, ``numpy`` or
   ``auto``), read once on first use;
3. default ``auto``: numba when importable, numpy otherwise.

Index streams are identical across backends (shared RNG contract); float
trajectories may differ in the last few ulps because the kernels use scalar
loops where numpy uses BLAS. Reruns under a fixed backend are bit-for-bit
reproducible.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

_VALID = ("auto", "numba", "numpy")
_forced: str | None = None
_resolved: str | None = None


def _resolve_env() -> str:
    global _resolved
    if _resolved is None:
        want = os.environ.get("PLLAB_BACKEND", "auto").lower()
        if want not in _VALID:
            raise ValueError(f"PLLAB_BACKEND must be one of {_VALID}, got {want!r}")
        if want == "numpy":
            _resolved = "numpy"
        else:
            try:
                import numba  # noqa: F401
                _resolved = "numba"
            except ImportError:
                if want == "numba":
                    raise
                _resolved = "numpy"
    return _resolved


def active_backend() -> str:
    """Name of the backend stochastic solvers will dispatch to."""
    return _forced if _forced is not None else _resolve_env()


def set_backend(name: str | None) -> None:
    """Force a backend programmatically; ``None`` restores env-based choice."""
    global _forced
    if name is not None and name not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {name!r}")
    _forced = name


@contextmanager
def use_backend(name: str):
    """Temporarily force a backend (used by the benchmark and tests)."""
    previous = _forced
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def kernels():
    """The jitted kernel module, or ``None`` under the numpy backend."""
    if active_backend() != "numba":
        return None
    from . import _kernels
    return _kernels
