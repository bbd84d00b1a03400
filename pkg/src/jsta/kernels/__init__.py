"""Hot kernels: compiled extension when available, numpy otherwise.

Set ``JSTA_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _fallback

BACKEND = "python"
if os.environ.get("JSTA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _pcg as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

laplacian_matvec = _impl.laplacian_matvec
pcg_laplacian = _impl.pcg_laplacian
degree = _fallback.degree

__all__ = ["BACKEND", "degree", "laplacian_matvec", "pcg_laplacian"]
