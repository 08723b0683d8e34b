"""Backend dispatch for the hot numeric kernels.

Two interchangeable backends exist:

* ``jit``  - numba @njit kernels (default when numba imports cleanly)
* ``pure`` - vectorized numpy fallback

Selection is controlled by the UESPACE_BACKEND environment variable,
read once at import time:

* unset or ``auto``: jit if numba is available, else pure
* ``numba``: force the jit backend (ImportError if numba is missing)
* ``numpy``: force the pure backend

``benchmarks/bench_kernels.py`` times the two backends against each other.
"""

import os

from uespace.kernels import pure as _pure

_choice = os.environ.get("UESPACE_BACKEND", "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"UESPACE_BACKEND must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

_impl = None
if _choice in ("auto", "numba"):
    try:
        from uespace.kernels import jit as _jit
        _impl = _jit
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
if _impl is None:
    _impl = _pure
    BACKEND = "numpy"

cholesky_lower = _impl.cholesky_lower
jacobi_eigh = _impl.jacobi_eigh
trial_dot = _impl.trial_dot
xoshiro_block = _impl.xoshiro_block


def backend_name():
    """Name of the active backend, 'numba' or 'numpy'."""
    return BACKEND


def set_num_threads(n):
    """Set the numba thread count; no-op on the pure backend."""
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(max(1, int(n)))
