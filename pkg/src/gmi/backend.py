"""Selects the kernel-core implementation at import time.

The compiled extension is preferred; the numpy module is the fallback.
Set ``GMI_BACKEND=numpy`` (or ``compiled``) to force a choice, e.g. when
benchmarking one against the other.
"""

import os

from gmi import _pycore

_FORCED = os.environ.get("GMI_BACKEND", "").strip().lower()

if _FORCED not in ("", "numpy", "compiled"):
    raise RuntimeError(f"GMI_BACKEND must be 'numpy' or 'compiled', got {_FORCED!r}")

if _FORCED == "numpy":
    impl = _pycore
    BACKEND = "numpy"
else:
    try:
        from gmi import _native as impl
        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        impl = _pycore
        BACKEND = "numpy"


def active_backend() -> str:
    """Name of the implementation in use: 'compiled' or 'numpy'."""
    return BACKEND


def get_impl(name: str):
    """Fetch a specific implementation module, for side-by-side comparison."""
    if name == "numpy":
        return _pycore
    if name == "compiled":
        from gmi import _native
        return _native
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list:
    out = ["numpy"]
    try:
        from gmi import _native  # noqa: F401
        out.insert(0, "compiled")
    except ImportError:
        pass
    return out
