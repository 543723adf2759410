"""Kernel backend selection.

The compiled Cython kernels are preferred when importable; the pure-Python
module is the fallback.  Both expose the same entry points and consume
random streams identically, so the choice affects speed only.  Set
LEVYFLUCT_PURE_PYTHON=1 to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCE_PURE = os.environ.get("LEVYFLUCT_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PURE:
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py


def kernels():
    """Module providing RandomSource, run_exact, run_euler and the codes."""
    return _impl


def backend_name() -> str:
    """"compiled" when the Cython kernels are active, else "python"."""
    return "compiled" if _impl.__name__.endswith("_kernels_cy") else "python"
