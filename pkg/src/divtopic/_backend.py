"""Kernel backend selection: the compiled extension if it built, else the
pure-Python fallback. DIVTOPIC_BACKEND=python|cython overrides at import;
``force_backend`` exists for tests and benchmarks."""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

kernels = _compiled if _compiled is not None else _kernels_py

_requested = os.environ.get("DIVTOPIC_BACKEND")
if _requested:
    if _requested == "python":
        kernels = _kernels_py
    elif _requested == "cython" and _compiled is not None:
        kernels = _compiled
    else:
        raise ImportError(f"DIVTOPIC_BACKEND={_requested!r} unavailable")


def backend_name() -> str:
    return kernels.BACKEND_NAME


def available_backends():
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def force_backend(name: str):
    """Switch the active kernel module ('python' or 'cython'). Returns the
    previous module so callers can restore it."""
    global kernels
    options = available_backends()
    if name not in options:
        raise ValueError(f"backend {name!r} not available; "
                         f"choices: {sorted(options)}")
    previous = kernels
    kernels = options[name]
    return previous
