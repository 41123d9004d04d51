"""Stepping kernels with a compiled fast path.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used. Set ``KEPLER_MTPI_PURE=1`` to force
the fallback. Both expose the same functions and agree bit for bit.
"""
import os

from . import _pykernels as pure

compiled = None
if os.environ.get("KEPLER_MTPI_PURE") != "1":
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

OK = pure.OK
COLLAPSE = pure.COLLAPSE
SINGULAR = pure.SINGULAR
ROW_WIDTH = pure.ROW_WIDTH
METHOD_RK4 = pure.METHOD_RK4
METHOD_LEAPFROG = pure.METHOD_LEAPFROG
METHOD_COMPOSITION4 = pure.METHOD_COMPOSITION4

__all__ = [
    "BACKEND",
    "backend",
    "compiled",
    "pure",
    "OK",
    "COLLAPSE",
    "SINGULAR",
    "ROW_WIDTH",
    "METHOD_RK4",
    "METHOD_LEAPFROG",
    "METHOD_COMPOSITION4",
]
