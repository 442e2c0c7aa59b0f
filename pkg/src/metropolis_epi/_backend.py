"""Kernel backend selection.

The compiled extension is used when it imports and the target is a
:class:`~metropolis_epi.target.LogisticPosterior`.  Setting
``METROPOLIS_EPI_PURE_PYTHON=1`` forces the fallback for the whole process.
"""

import os

from . import _pykernel

_compiled = None
if not os.environ.get("METROPOLIS_EPI_PURE_PYTHON"):
    try:
        from . import _ckernel as _compiled
    except ImportError:  # extension not built
        _compiled = None

HAVE_COMPILED = _compiled is not None
BACKENDS = ("auto", "compiled", "python")


def compiled():
    return _compiled


def python():
    return _pykernel


def use_compiled(backend="auto"):
    """Resolve a backend name to True (compiled) or False (Python)."""
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but metropolis_epi._ckernel is not built")
        return True
    if backend == "python":
        return False
    return HAVE_COMPILED


def name(backend="auto"):
    return "compiled" if use_compiled(backend) else "python"
