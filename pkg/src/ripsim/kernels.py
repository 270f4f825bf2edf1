"""Kernel selection: compiled Cython extension if available, numpy fallback.

Set RIPSIM_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("RIPSIM_PURE_PYTHON"):
    _impl = _compiled
else:
    _impl = _kernel_py

HAVE_COMPILED = _compiled is not None
USING_COMPILED = _impl is not _kernel_py

propagate = _impl.propagate

python_kernel = _kernel_py
compiled_kernel = _compiled
