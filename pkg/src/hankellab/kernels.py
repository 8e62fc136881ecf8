"""Backend selection for the hot kernels.

The compiled extension ``hankellab._core`` is used when it was built;
otherwise the numpy versions in ``hankellab._core_py`` are used. Set
``HANKELLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from hankellab import _core_py

if os.environ.get("HANKELLAB_PURE_PYTHON"):
    _impl = _core_py
else:
    try:
        from hankellab import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = "python" if _impl is _core_py else "cython"

dyadic_enlarge = _impl.dyadic_enlarge
grid_enlarge = _impl.grid_enlarge
box_stab_sums = _impl.box_stab_sums
counting_sum = _impl.counting_sum
lowrank_lq_power_sum = _impl.lowrank_lq_power_sum


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _core_py}
    try:
        from hankellab import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found
