"""Backend selection for the convolution kernels.

The compiled extension is used when it was built; ``RAWHDR_BACKEND=python``
forces the numpy fallback.
"""

import os
from types import SimpleNamespace

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def _default() -> str:
    forced = os.environ.get("RAWHDR_BACKEND")
    if forced:
        if forced not in BACKENDS:
            raise ImportError(f"RAWHDR_BACKEND={forced!r} is not available; have {sorted(BACKENDS)}")
        return forced
    return "cython" if "cython" in BACKENDS else "python"


_active = SimpleNamespace(name=_default())


def backend_name() -> str:
    return _active.name


def set_backend(name: str) -> None:
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(BACKENDS)}")
    _active.name = name


def conv2d(x, w, b, pad):
    return BACKENDS[_active.name].conv2d(x, w, b, pad)


def depthwise3x3(x, kern, pad):
    return BACKENDS[_active.name].depthwise3x3(x, kern, pad)
