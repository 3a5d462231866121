"""Backend selection for the hot kernels.

The numba backend is the default. Setting ``SPECSHIFT_PURE_NUMPY=1`` in the
environment (or numba failing to import) selects the interpreted fallback,
which runs the same source. ``benchmarks/bench_kernels.py`` times the two
against each other.
"""

import os

import numpy as np

_FLAG = os.environ.get("SPECSHIFT_PURE_NUMPY", "").strip().lower()
_FORCE_PLAIN = _FLAG in {"1", "true", "yes", "on"}

if _FORCE_PLAIN:
    from . import _kernels_plain as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        from . import _kernels_plain as _impl

        BACKEND = "numpy"

cyclic_jacobi = _impl.cyclic_jacobi
rk4_second_order = _impl.rk4_second_order
rk4_first_order = _impl.rk4_first_order


def warm_up():
    """Trigger (cached) jit compilation on tiny inputs; no-op on numpy."""
    m = np.eye(2, dtype=np.complex128)
    cyclic_jacobi(m)
    q = np.zeros((1, 2, 2), dtype=np.complex128)
    f0 = np.eye(2, dtype=np.complex128)
    rk4_second_order(q, q, q, -1.0, f0, f0, 0.1, False)
    rk4_second_order(q, q, q, -1.0, f0, f0, 0.1, True)
    rk4_first_order(q, q, q, f0, 0.1)
