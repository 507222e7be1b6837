"""Import-time selection between the compiled and pure-Python kernels.

The compiled extension is preferred when importable; set
``GBMFLOW_BACKEND=python`` (or ``compiled``) to force a choice.  Both
backends draw from identical RNG streams, so the choice never changes
simulation results, only speed.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_forced = os.environ.get("GBMFLOW_BACKEND", "").strip().lower()
if _forced in ("", "auto"):
    _selected = _compiled if _compiled is not None else _kernels_py
elif _forced in ("compiled", "cython", "c"):
    if _compiled is None:
        raise ImportError(
            "GBMFLOW_BACKEND=compiled but the gbmflow._kernels extension "
            "is not built; reinstall with a C compiler available"
        )
    _selected = _compiled
elif _forced in ("python", "py"):
    _selected = _kernels_py
else:
    raise ImportError(f"unknown GBMFLOW_BACKEND value {_forced!r}")


def backend_name() -> str:
    """Name of the kernel backend selected at import ('compiled'/'python')."""
    return _selected.BACKEND


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_kernels(name: str | None = None):
    """The selected kernel module, or a specific one by name."""
    if name is None:
        return _selected
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
