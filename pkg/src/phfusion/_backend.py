"""Selects the kernel backend.

Set ``PHFUSION_BACKEND=numpy`` to force the pure-numpy kernels, or
``PHFUSION_BACKEND=numba`` (the default when numba imports) for the
JIT-compiled loops. The choice is fixed at import time.
"""
import os

_requested = os.environ.get("PHFUSION_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(
        f"PHFUSION_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"
