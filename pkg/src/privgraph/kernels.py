"""Backend selection for the hot loops.

The compiled extension is preferred; set ``PRIVGRAPH_PURE_PYTHON=1`` to force
the NumPy fallback. ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("PRIVGRAPH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

louvain_move_pass = _impl.louvain_move_pass
bfs_eccentricities = _impl.bfs_eccentricities
ic_live_counts = _impl.ic_live_counts
count_triangles = _impl.count_triangles


def compiled_available() -> bool:
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True
