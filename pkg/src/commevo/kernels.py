"""Hot-loop kernels, compiled when available.

``IMPLEMENTATION`` names the active variant (``"compiled"`` or ``"numpy"``).
Set ``COMMEVO_PURE=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

_IMPLS = {"numpy": _kernels_py}
try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    _IMPLS["compiled"] = _compiled

if _compiled is not None and os.environ.get("COMMEVO_PURE") != "1":
    IMPLEMENTATION = "compiled"
else:
    IMPLEMENTATION = "numpy"

nilpotent_chain = _IMPLS[IMPLEMENTATION].nilpotent_chain
superdiag_chain = _IMPLS[IMPLEMENTATION].superdiag_chain


def available() -> list[str]:
    return sorted(_IMPLS)


def get(name: str):
    """Kernel module for ``name``; raises ``KeyError`` if it is not built."""
    return _IMPLS[name]
