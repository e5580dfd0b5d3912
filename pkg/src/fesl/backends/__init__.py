"""Backend selection for the per-round hot loops.

The compiled accelerator is preferred when importable; the pure NumPy
fallback is always available. ``FESL_BACKEND=python`` or
``FESL_BACKEND=compiled`` in the environment forces a choice at import
time, and callers can request a specific backend by name.
"""

from __future__ import annotations

import os

from ..core import InvalidInputError
from . import pyloops

try:
    from . import _speedups
except ImportError:
    _speedups = None

_FORCED = os.environ.get("FESL_BACKEND")
if _FORCED not in (None, "", "python", "compiled"):
    raise InvalidInputError(f"FESL_BACKEND must be python or compiled, got {_FORCED!r}")
if _FORCED == "compiled" and _speedups is None:
    raise ImportError("FESL_BACKEND=compiled but the accelerator is not built")

_DEFAULT = pyloops if (_FORCED == "python" or _speedups is None) else _speedups


def available_backends():
    names = [pyloops.NAME]
    if _speedups is not None:
        names.append(_speedups.NAME)
    return names


def active_backend() -> str:
    return _DEFAULT.NAME


def get_loops(name: str | None = None):
    """Return the loop module for ``name`` (or the active default)."""
    if name is None:
        return _DEFAULT
    if name == "python":
        return pyloops
    if name == "compiled":
        if _speedups is None:
            raise InvalidInputError("compiled backend is not built")
        return _speedups
    raise InvalidInputError(f"unknown backend {name!r}")
