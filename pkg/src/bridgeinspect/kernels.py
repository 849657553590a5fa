"""Backend selection for the numerical kernels.

The compiled extension is used when it was built; otherwise, or when
``BRIDGEINSPECT_PURE_PYTHON`` is set to a non-empty value, the numpy versions
are used. Both expose the same three functions.
"""

import os

from bridgeinspect import _kernels_py

if os.environ.get("BRIDGEINSPECT_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from bridgeinspect import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

raycast = _impl.raycast
hough_vote = _impl.hough_vote
held_karp_atsp = _impl.held_karp_atsp


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _kernels_py}
    try:
        from bridgeinspect import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
