"""Selection of the numeric backend for the hot kernels.

The coordinate-descent inner loops compile with numba by default. Setting
the environment variable ``GOALPS_DISABLE_NUMBA`` to anything other than
``""`` or ``"0"`` (or running without numba installed) switches to the
vectorized pure-numpy fallbacks in ``_kernels``. The two backends compute
the same quantities; last-ulp rounding can differ because BLAS reductions
are not sequential sums.
"""

from __future__ import annotations

import os

ENV_FLAG = "GOALPS_DISABLE_NUMBA"


def _detect() -> bool:
    if os.environ.get(ENV_FLAG, "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _detect()


def backend_name() -> str:
    """Name of the active kernel backend, recorded in output headers."""
    return "numba" if NUMBA_ENABLED else "numpy"
