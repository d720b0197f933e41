"""Hot-loop kernels with a compiled core and a NumPy fallback.

The Cython extension is selected at import when available; setting the
environment variable ``FLATPOLY_PURE=1`` forces the pure NumPy implementation
(useful for benchmarking the two against each other).  Both implementations
expose the same functions and produce matching results.
"""

import os

from flatpoly._kernels import _fallback

if os.environ.get("FLATPOLY_PURE"):
    _impl = _fallback
    HAVE_NATIVE = False
else:
    try:
        from flatpoly._kernels import _native as _impl

        HAVE_NATIVE = True
    except ImportError:
        _impl = _fallback
        HAVE_NATIVE = False

ACTIVE = "native" if HAVE_NATIVE else "python"

find_cells = _impl.find_cells
grow_segment = _impl.grow_segment
laplacian_filter = _impl.laplacian_filter
bilateral_iterate = _impl.bilateral_iterate
