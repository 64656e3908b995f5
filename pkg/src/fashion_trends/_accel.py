"""Numba switch.

Hot kernels are compiled with numba unless ``FASHION_TRENDS_DISABLE_NUMBA``
is set to a truthy value (or numba is missing), in which case the
pure-numpy implementations in :mod:`fashion_trends._kernels` are used.
"""

import os

_FLAG = "FASHION_TRENDS_DISABLE_NUMBA"


def _disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled():
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorate(func):
            return func

        return decorate


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
