"""Dense Hermitian matrix utilities: validated construction, a deterministic
Jacobi eigensolver, spectral matrix functions and eigenvalue counting.

Everything here works on plain complex ndarrays. Matrices are small (the
operator paths live in dimension <= ~64), so the cyclic Jacobi sweeps in the
kernel backend are both fast and platform-stable.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .errors import NotHermitianError, OnEigenvalueError

HERMITICITY_RTOL = 1e-12
COUNT_TOL = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    vectors: np.ndarray  # unitary, columns are eigenvectors


def max_abs(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def hermitian(M) -> np.ndarray:
    """Validate and return a complex128 copy of a Hermitian matrix.

    Raises NotHermitianError if entries are non-finite or the conjugate
    symmetry defect exceeds 1e-12 * max(1, max-entry norm).
    """
    A = np.array(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotHermitianError("matrix has non-finite entries")
    scale = max(1.0, max_abs(A))
    defect = max_abs(A - A.conj().T)
    if defect > HERMITICITY_RTOL * scale:
        raise NotHermitianError(
            f"conjugate-symmetry defect {defect:.3e} exceeds {HERMITICITY_RTOL * scale:.3e}"
        )
    # symmetrize so downstream algebra sees an exactly Hermitian matrix
    A = 0.5 * (A + A.conj().T)
    return A


def eigh(M) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix via cyclic Jacobi sweeps.

    Deterministic for a fixed input; eigenvalues ascending, eigenvectors in
    the matching column order.
    """
    A = hermitian(M)
    w, U, sweeps = kernels.cyclic_jacobi(np.ascontiguousarray(A))
    if sweeps < 0:
        raise RuntimeError("Jacobi sweeps failed to converge")
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], U[:, order])


def apply_function(M, f: Callable[[float], complex]) -> np.ndarray:
    """Evaluate f(M) spectrally: U diag(f(lambda)) U*.

    f is applied to each eigenvalue and must be finite there. The result is
    Hermitian whenever f is real-valued on the spectrum.
    """
    w, U = eigh(M)
    try:
        fw = np.array([f(float(x)) for x in w], dtype=np.complex128)
    except ArithmeticError as exc:
        raise ValueError(f"function undefined on the spectrum: {exc}") from exc
    if not np.all(np.isfinite(fw)):
        raise ValueError("function not finite on the spectrum")
    return (U * fw) @ U.conj().T


def regularized_sign(M, z) -> np.ndarray:
    """The matrix function s -> s / sqrt(s^2 - z), principal square root.

    Defined for z off [0, inf); for real negative z the result is Hermitian
    with all eigenvalue magnitudes below 1. Tends to sign(M) as z -> 0-.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real >= 0.0:
        raise ValueError("z must lie off [0, inf)")
    return apply_function(M, lambda s: s / np.sqrt(complex(s * s) - z))


def decay_rate(M, z: float) -> np.ndarray:
    """Positive-definite square root of M^2 - z I for real z < 0.

    These are the exponential rates of the constant-coefficient tail
    solutions used by the Jost constructions.
    """
    if not (np.isreal(z) and float(z) < 0.0):
        raise ValueError("z must be real and negative")
    z = float(z)
    return apply_function(M, lambda s: np.sqrt(s * s - z))


def trace_norm(M) -> float:
    """Sum of singular values, computed as tr sqrt(M* M).

    For Hermitian M this is the sum of absolute eigenvalues.
    """
    A = np.asarray(M, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    w, _ = eigh(A.conj().T @ A)
    # roundoff moves exact zeros of A*A to ~eps*|A|^2; sqrt would inflate
    # that to ~3e-9 absolute, so floor the noise band first
    floor = 100.0 * A.shape[0] * np.finfo(np.float64).eps * max(float(w[-1]), 0.0)
    w = np.where(w > floor, w, 0.0)
    return float(np.sum(np.sqrt(w)))


def count_below(eigenvalues, level: float) -> int:
    """Number of eigenvalues strictly below ``level``.

    The input must be sorted ascending. A level within 1e-10 of an
    eigenvalue is rejected (OnEigenvalueError): the count would silently
    depend on rounding.
    """
    w = np.asarray(eigenvalues, dtype=np.float64)
    if w.size and np.any(np.diff(w) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    if w.size and np.min(np.abs(w - level)) <= COUNT_TOL:
        raise OnEigenvalueError(f"level {level!r} is within {COUNT_TOL} of an eigenvalue")
    return int(np.searchsorted(w, level, side="left"))
