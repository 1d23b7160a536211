"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback takes over. ``AVSAMPLE_BACKEND=python|compiled`` forces a choice
(forcing ``compiled`` without the built extension is an import error).
``AVS_THREADS`` supplies the default worker count for kernels that take one.
"""

from __future__ import annotations

import os

from . import _py_kernels

_forced = os.environ.get("AVSAMPLE_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _py_kernels
elif _forced == "compiled":
    from . import _kernels as kernels  # noqa: F401
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _py_kernels

BACKEND_NAME: str = kernels.BACKEND_NAME


def resolve_threads(threads: int | None) -> int:
    """Explicit argument, else AVS_THREADS, else 1."""
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be >= 1")
        return int(threads)
    env = os.environ.get("AVS_THREADS", "").strip()
    if env:
        value = int(env)
        if value < 1:
            raise ValueError("AVS_THREADS must be >= 1")
        return value
    return 1
