"""Backend selection for the rollout kernel.

The compiled ``_ckernel`` extension is used when importable; otherwise the
pure-Python ``_pykernel``.  Set ``RULEEVO_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os

from . import _pykernel

if os.environ.get("RULEEVO_PURE_PYTHON", "") not in ("", "0"):
    _backend = _pykernel
else:
    try:
        from . import _ckernel as _backend
    except ImportError:
        _backend = _pykernel

BACKEND: str = _backend.NAME
rollout_batch = _backend.rollout_batch
simulate = _backend.simulate


def compiled_available() -> bool:
    try:
        from . import _ckernel  # noqa: F401
    except ImportError:
        return False
    return True
