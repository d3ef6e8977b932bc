"""Pick the kernel implementation at import time.

``COOPEST_BACKEND`` may be ``auto`` (default: compiled if importable),
``cython`` (fail if the extension is missing) or ``python``.
"""
import os

from . import _pykernels


def load(name=None):
    name = (name or os.environ.get("COOPEST_BACKEND", "auto")).lower()
    if name == "python":
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        if name == "cython":
            raise
        return _pykernels
    return _ckernels


kernels = load()
