"""Kernel backend selection: numba-compiled hot loops with a NumPy fallback.

The hot numeric kernels (the SPDE time stepper, the modified-Bessel series)
are compiled with numba when it is importable and the environment variable
``BESSELBRIDGES_DISABLE_NUMBA`` is unset.  With the flag set (or numba
missing) every kernel runs through a pure NumPy/Python path.  The two paths
compute the same recurrences; only speed and last-bit rounding differ.
``benchmarks/bench_backends.py`` compares them.
"""

import os

DISABLE_ENV = "BESSELBRIDGES_DISABLE_NUMBA"


def _disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = False
if not _disabled():
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        USE_NUMBA = False

if USE_NUMBA:
    from numba import njit
else:

    def njit(*args, **kwargs):
        """No-op replacement for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    """Best-effort thread-count control for the compiled backend."""
    if n <= 0:
        return
    if USE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
