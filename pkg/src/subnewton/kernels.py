"""Backend selection for the constrained-subproblem kernels.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used. Setting SUBNEWTON_PURE_PYTHON=1 forces the fallback.
"""

import os

from . import _kernels_py

_force_python = os.environ.get("SUBNEWTON_PURE_PYTHON", "").strip() not in ("", "0")

_compiled = None
if not _force_python:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

BACKEND = "compiled" if _compiled is not None else "python"

KIND_L1 = _kernels_py.KIND_L1
KIND_BOX = _kernels_py.KIND_BOX

project_l1 = _impl.project_l1
project_box = _impl.project_box
solve_projected_quadratic = _impl.solve_projected_quadratic


def backends():
    """All importable backends by name (for benchmarks and cross-checks)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
