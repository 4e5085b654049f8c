"""Kernel backend selection: compiled extension if available, else pure Python.

Set STYLO_PURE_KERNELS=1 to force the pure-Python backend (useful for
benchmarking and for verifying backend equivalence).
"""

import os

from . import _pykernels

if os.environ.get("STYLO_PURE_KERNELS") == "1":
    _impl = _pykernels
    BACKEND = "pure-python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "pure-python"

KIND_WORD = 0
KIND_PUNCT = 1
KIND_NUMBER = 2

scan = _impl.scan
syllables = _impl.syllables
bow256 = _impl.bow256
fnv1a64 = _impl.fnv1a64
