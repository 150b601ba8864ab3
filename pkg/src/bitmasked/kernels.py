"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy versions in ``_pykernels`` are used. Setting ``BITMASKED_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("BITMASKED_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    _impl = _ckernels
else:
    BACKEND = "python"
    _impl = _pykernels

dense_plain_product = _impl.dense_plain_product
dense_masked_product = _impl.dense_masked_product
approximate_block = _impl.approximate_block
superset_decode = _impl.superset_decode
remove_candidates = _impl.remove_candidates
expansion_counts = _impl.expansion_counts
