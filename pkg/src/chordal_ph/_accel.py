"""Optional numba acceleration for the hot loops.

Kernels are written as plain python over numpy arrays and compiled with
``numba.njit`` when numba is importable and not disabled.  Setting the
environment variable ``CHORDAL_PH_DISABLE_NUMBA=1`` forces the pure
python versions, which is useful for debugging and for the benchmark.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
else:
    # old TBB builds only produce a warning; prefer the other layers
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = numba is not None and not _flag("CHORDAL_PH_DISABLE_NUMBA")

numba_settings = {"nogil": True, "cache": True, "fastmath": False}


def njit(func):
    """Compile ``func`` with numba if enabled, otherwise return it unchanged.

    The original python function stays reachable as ``.py_func`` in both
    cases so callers can pick a backend explicitly.
    """
    if not USE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(**numba_settings)(func)


def parallel_njit(func):
    """Like :func:`njit` but with ``parallel=True`` so ``prange`` loops use threads."""
    if not USE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(parallel=True, **numba_settings)(func)


prange = numba.prange if USE_NUMBA else range


def set_threads(n):
    """Set the numba thread count (no-op without numba). Returns the count used."""
    if n is None:
        n = os.environ.get("CHORDAL_PH_THREADS")
    if n is None or numba is None:
        return None
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
