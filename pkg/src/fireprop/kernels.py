"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over. Both produce identical outputs for identical seeds.
"""
from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - exercised only without a compiler
    _ckernels = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

DEFAULT = "cython" if _ckernels is not None else "python"
_active = BACKENDS[DEFAULT]


def get(name: str | None = None) -> ModuleType:
    """Return the kernel module ``name`` (``None`` means the active one)."""
    if name is None:
        return _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None


def use(name: str) -> None:
    """Switch the active backend for the rest of the process."""
    global _active
    _active = get(name)


def active_name() -> str:
    return next(k for k, m in BACKENDS.items() if m is _active)
