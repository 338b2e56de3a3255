"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise the NumPy
fallback is used. Setting ``SPATIAL_GREEDY_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("SPATIAL_GREEDY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

se_cross = _impl.se_cross
rank1_downdate_rowsq = _impl.rank1_downdate_rowsq
residual_rowsq = _impl.residual_rowsq
greedy_cliques = _impl.greedy_cliques
se_cross_matvec = _impl.se_cross_matvec

__all__ = [
    "BACKEND",
    "se_cross",
    "rank1_downdate_rowsq",
    "residual_rowsq",
    "greedy_cliques",
    "se_cross_matvec",
]
