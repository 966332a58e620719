"""Kernel backend chosen once at import.

``HOROOPT_BACKEND=python`` forces the numpy kernels, ``cython`` requires the
compiled ones, anything else (default ``auto``) prefers compiled and falls
back silently when the extension is not built.
"""

import os

_requested = os.environ.get("HOROOPT_BACKEND", "auto").strip().lower()

if _requested == "python":
    from . import _pykernels as kernels
    NAME = "python"
else:
    try:
        from . import _ckernels as kernels
        NAME = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _pykernels as kernels
        NAME = "python"

__all__ = ["kernels", "NAME"]
