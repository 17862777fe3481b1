"""Backend selection for the hot kernels.

The compiled extension is used when present; setting PASEARCH_PURE_PYTHON=1
(or a missing build) selects the numpy fallback.  `BACKEND` records which
one is active.
"""
from __future__ import annotations

import os

if os.environ.get("PASEARCH_PURE_PYTHON"):
    from . import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]

        BACKEND = "ext"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "python"

resolve_left_choices = _impl.resolve_left_choices
build_right_csr = _impl.build_right_csr
compensated_cumsum = _impl.compensated_cumsum

__all__ = [
    "BACKEND",
    "resolve_left_choices",
    "build_right_csr",
    "compensated_cumsum",
]
