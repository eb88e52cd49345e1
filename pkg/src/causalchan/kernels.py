"""Backend selection for the distance kernels.

The compiled extension is used when it was built; otherwise the numpy
versions are used. Setting CAUSALCHAN_BACKEND=python forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

if os.environ.get("CAUSALCHAN_BACKEND", "").lower() == "python" or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

_impl = BACKENDS[BACKEND]


def use_backend(name: str) -> None:
    """Switch the active backend ("compiled" or "python")."""
    global BACKEND, _impl
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}")
    BACKEND = name
    _impl = BACKENDS[name]


def chunk_distances(table, y, erased):
    return _impl.chunk_distances(table, y, erased)


def distance_polys(dist, maxdeg):
    return _impl.distance_polys(dist, maxdeg)


def prefix_min_distances(table, y, erased):
    return _impl.prefix_min_distances(table, y, erased)
