"""Hot-loop kernels: per-step distribution fill and constrained argmax.

A compiled Cython extension is preferred; a numpy fallback with identical
semantics is selected at import time when the extension is unavailable.
Set STEGOPIVOT_KERNELS=py to force the fallback (used by the benchmark
and the backend-parity tests).
"""

import os

if os.environ.get("STEGOPIVOT_KERNELS", "").lower() in ("py", "python", "fallback"):
    from . import _fallback as _impl
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

BACKEND = _impl.BACKEND
add_k_fill = _impl.add_k_fill
renormalize_excluding = _impl.renormalize_excluding
argmax_subset = _impl.argmax_subset

__all__ = ["BACKEND", "add_k_fill", "renormalize_excluding", "argmax_subset"]
