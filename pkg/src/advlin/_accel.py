"""Numba acceleration switch.

Hot numeric kernels in :mod:`advlin._kernels` are JIT-compiled with numba
by default.  Setting the environment variable ``ADVLIN_NUMBA`` to ``0``,
``false``, ``off`` or ``no`` (before first import) keeps them as plain
NumPy/Python functions.  The same source implements both paths, so results
agree up to floating-point rounding; see ``benchmarks/bench_kernels.py``
for a speed comparison.
"""

import os

_FALSY = {"0", "false", "off", "no"}


def _resolve_flag() -> bool:
    raw = os.environ.get("ADVLIN_NUMBA", "1").strip().lower()
    if raw in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _resolve_flag()

if NUMBA_ENABLED:
    from numba import njit as _njit

    def maybe_jit(func):
        return _njit(cache=True)(func)

else:

    def maybe_jit(func):
        return func
