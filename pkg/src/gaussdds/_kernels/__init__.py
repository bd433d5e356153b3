"""Hot kernels: compiled extension when available, numpy otherwise.

Set ``GAUSSDDS_PURE=1`` to force the numpy implementation.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("GAUSSDDS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels

        _impl = _ckernels
        BACKEND = "cython"
    except ImportError:
        pass

SYMBOL_NORM_CEILING = _pykernels.SYMBOL_NORM_CEILING


def backend(name: str | None = None):
    """The kernel module named ``cython`` or ``python`` (default: the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        out.insert(0, "cython")
    except ImportError:
        pass
    return out


def __getattr__(name):
    return getattr(_impl, name)
