"""Kernel dispatch: compiled extension when importable, NumPy otherwise.

Set ``RESLAB_PURE_PYTHON=1`` to force the NumPy path.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("RESLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

exp_sum = _impl.exp_sum
phase_minor_batch = _impl.phase_minor_batch

__all__ = ["BACKEND", "exp_sum", "phase_minor_batch", "python_backend", "compiled_backend"]
