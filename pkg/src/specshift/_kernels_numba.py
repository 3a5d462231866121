"""numba-compiled variants of the kernels in ``_kernels_plain``.

The plain functions are jitted as-is, so both backends run the identical
algorithm; ``nogil`` lets independent solves overlap under ``--threads``.
"""

from numba import njit

from . import _kernels_plain as _plain

cyclic_jacobi = njit(cache=True, nogil=True)(_plain.cyclic_jacobi)
rk4_second_order = njit(cache=True, nogil=True)(_plain.rk4_second_order)
rk4_first_order = njit(cache=True, nogil=True)(_plain.rk4_first_order)
