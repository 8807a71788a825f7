"""Tree-pass kernels with a compiled core and a pure-NumPy fallback.

The backend is chosen once at import time. Set ``HZSL_KERNELS`` to
``compiled`` or ``python`` to force a backend (``auto`` is the default and
prefers the compiled extension when it was built). Both backends produce
bit-identical results; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import os

_CHOICE = os.environ.get("HZSL_KERNELS", "auto")
if _CHOICE not in ("auto", "compiled", "python"):
    raise ValueError(f"HZSL_KERNELS must be auto|compiled|python, got {_CHOICE!r}")


def load_backend(name):
    """Return the kernel module for ``name`` ('compiled' or 'python')."""
    if name == "compiled":
        from . import _speedups

        return _speedups
    if name == "python":
        from . import _pure

        return _pure
    raise ValueError(f"unknown kernel backend {name!r}")


if _CHOICE == "python":
    _impl = load_backend("python")
    BACKEND = "python"
elif _CHOICE == "compiled":
    _impl = load_backend("compiled")
    BACKEND = "compiled"
else:
    try:
        _impl = load_backend("compiled")
        BACKEND = "compiled"
    except ImportError:
        _impl = load_backend("python")
        BACKEND = "python"

path_sums = _impl.path_sums
subtree_sums = _impl.subtree_sums

__all__ = ["BACKEND", "load_backend", "path_sums", "subtree_sums"]
