"""Kernel backend selection.

The compiled extension is preferred when present; the pure numpy
fallback is used otherwise.  Set ``EOPKIT_PURE_PYTHON=1`` to force the
fallback (the benchmark suite uses this to compare the two).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("EOPKIT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
lasso_cd_gram = _impl.lasso_cd_gram
prox_subgradient_maxmin = _impl.prox_subgradient_maxmin
