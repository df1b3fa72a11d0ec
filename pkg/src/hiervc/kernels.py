"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise, or when
``HIERVC_PURE_PYTHON=1`` is set, the numpy/pure-Python versions are used.
Both backends produce identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if not os.environ.get("HIERVC_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if backend is compiled_backend else "python"

full_search = backend.full_search
xoshiro_uint64 = backend.xoshiro_uint64
xoshiro_gaussian = backend.xoshiro_gaussian
