"""Import-time selection between the compiled core and the NumPy fallback."""
import os

from relugp import _fallback

if os.environ.get("RELUGP_PURE_PYTHON", "").strip() not in ("", "0"):
    core = _fallback
else:
    try:
        from relugp import _core as core
    except ImportError:  # extension not built
        core = _fallback

COMPILED = core is not _fallback
NAME = "cython" if COMPILED else "numpy"


def available_backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"numpy": _fallback}
    try:
        from relugp import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found
