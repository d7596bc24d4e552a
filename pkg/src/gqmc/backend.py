"""Backend selection: compiled extension when available, numpy fallback otherwise.

Set GQMC_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
cross-backend tests).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _core_py

try:
    from . import _core  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _core = None

if os.environ.get("GQMC_PURE_PYTHON"):
    _active = _core_py
else:
    _active = _core if _core is not None else _core_py

BACKEND: str = _active.BACKEND


def get_core() -> ModuleType:
    """The module providing the hot kernels for this process."""
    return _active


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _core_py}
    if _core is not None:
        out["compiled"] = _core
    return out
