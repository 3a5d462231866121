"""Grid discretizations of the partner Schrodinger operators
H = -d^2/dt^2 + Q(t) and H~ = -d^2/dt^2 + Q~(t), plus an independent
shooting oracle for the kernel dimensions.

The operators are assembled directly from the second-order form with
central differences and Dirichlet conditions at -+T (unknowns at the N-2
interior nodes). In node-major ordering the matrices are Hermitian banded
with d sub/superdiagonals, so eigenvalues come from LAPACK's banded
solvers in O(n^2 d) time. Only eigenvalues are ever needed.

Discretizing the second-order operators, rather than squaring a discrete
first-order difference, is what preserves the index: a square truncation
of d/dt + A(t) is automatically index 0, while the kernel asymmetry lives
in boundary behavior that the Dirichlet second-order problem captures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from . import hermitian as hm
from . import kernels
from .errors import (
    IllConditionedIntersectionError,
    NoSpectralGapAtThresholdError,
    UnstableLevelError,
)
from .jost import GridSpec
from .paths import OperatorPath

DEFAULT_CAP = 6000
NEGATIVE_ARTIFACT_RTOL = 1e-6


@dataclass(frozen=True)
class DiscretizedPair:
    """Banded discretizations of H and H~ on a Dirichlet grid.

    ``band_H``/``band_Ht`` use scipy's upper banded storage with d
    superdiagonals over the (N-2)*d interior unknowns. ``eigs_H`` and
    ``eigs_Ht`` are all eigenvalues, ascending. ``negative_artifact`` is
    set when H~ (a nonnegative operator in the continuum) shows a negative
    discrete eigenvalue beyond the expected O(h^2) dust.
    """

    grid: GridSpec
    dim: int
    band_H: np.ndarray
    band_Ht: np.ndarray
    eigs_H: np.ndarray
    eigs_Ht: np.ndarray
    negative_artifact: bool

    @property
    def size(self) -> int:
        return self.band_H.shape[1]

    def dense(self, which: str = "H") -> np.ndarray:
        """Materialize a dense matrix (tests / small grids only)."""
        band = self.band_H if which == "H" else self.band_Ht
        u = band.shape[0] - 1
        n = band.shape[1]
        M = np.zeros((n, n), dtype=band.dtype)
        for r in range(u + 1):
            off = u - r
            idx = np.arange(off, n)
            M[idx - off, idx] = band[r, off:]
            if off:
                M[idx, idx - off] = band[r, off:].conj()
        return M


def _assemble_band(Q_nodes: np.ndarray, h: float) -> np.ndarray:
    """Upper banded storage of -delta^2/h^2 + blockdiag(Q(t_k))."""
    n_nodes, d, _ = Q_nodes.shape
    n = n_nodes * d
    band = np.zeros((d + 1, n), dtype=np.complex128)
    inv_h2 = 1.0 / (h * h)
    for off in range(d):
        row = d - off
        cols = (np.arange(n_nodes)[:, None] * d + np.arange(off, d)[None, :]).ravel()
        vals = Q_nodes[:, np.arange(off, d) - off, np.arange(off, d)].ravel()
        band[row, cols] = vals
    band[d, :] += 2.0 * inv_h2
    band[0, d:] = -inv_h2
    return band


def _band_eigvals(band: np.ndarray) -> np.ndarray:
    if np.max(np.abs(band.imag)) == 0.0:
        band = band.real
    return scipy.linalg.eig_banded(band, lower=False, eigvals_only=True)


def build_discretized(path: OperatorPath, grid: GridSpec, cap: int = DEFAULT_CAP) -> DiscretizedPair:
    """Assemble and diagonalize the discretized pair (H, H~)."""
    d = path.dim
    n_interior = grid.N - 2
    if n_interior * d > cap:
        raise ValueError(
            f"problem size {n_interior * d} exceeds the configured cap {cap}"
        )
    ts = grid.nodes()[1:-1]
    A_nodes = path.values(ts)
    Asq = A_nodes @ A_nodes
    Ap = path.derivatives(ts, side=1)
    band_H = _assemble_band(Asq - Ap, grid.h)
    band_Ht = _assemble_band(Asq + Ap, grid.h)
    eigs_H = _band_eigvals(band_H)
    eigs_Ht = _band_eigvals(band_Ht)
    scale = max(float(np.max(np.abs(eigs_Ht))), 1e-300)
    negative_artifact = bool(np.min(eigs_Ht) < -NEGATIVE_ARTIFACT_RTOL * scale)
    return DiscretizedPair(
        grid=grid,
        dim=d,
        band_H=band_H,
        band_Ht=band_Ht,
        eigs_H=eigs_H,
        eigs_Ht=eigs_Ht,
        negative_artifact=negative_artifact,
    )


def kernel_dims(D: DiscretizedPair, threshold: float) -> Tuple[int, int, Tuple[float, float]]:
    """Eigenvalue counts of H and H~ below ``threshold``, with margins.

    The threshold must fall in a clear spectral gap: the smallest
    eigenvalue at or above it must exceed ten times the largest one below
    (measured across both operators), else the split is a guess and the
    operation refuses.
    """
    n_H = int(np.searchsorted(D.eigs_H, threshold, side="left"))
    n_Ht = int(np.searchsorted(D.eigs_Ht, threshold, side="left"))
    below = []
    above = []
    for eigs, n in ((D.eigs_H, n_H), (D.eigs_Ht, n_Ht)):
        if n > 0:
            below.append(float(eigs[n - 1]))
        if n < eigs.size:
            above.append(float(eigs[n]))
    largest_below = max(below) if below else -np.inf
    smallest_above = min(above) if above else np.inf
    if np.isfinite(largest_below):
        if smallest_above <= 0.0 or smallest_above < 10.0 * max(largest_below, 0.0) or (
            largest_below > 0.0 and smallest_above / largest_below < 10.0
        ):
            raise NoSpectralGapAtThresholdError(
                f"eigenvalues {largest_below:.3e} and {smallest_above:.3e} "
                f"straddle threshold {threshold:.3e} without a 10x gap"
            )
    return n_H, n_Ht, (largest_below, smallest_above)


def fredholm_index(
    path: OperatorPath, grid: GridSpec, threshold: float, cap: int = DEFAULT_CAP
) -> int:
    """dim ker H - dim ker H~ from the discretized pair."""
    path.tail_gap()  # endpoints must be invertible for the index to exist
    D = build_discretized(path, grid, cap=cap)
    n_H, n_Ht, _ = kernel_dims(D, threshold)
    return n_H - n_Ht


def ssf_at(D: DiscretizedPair, lam: float, gap: float) -> int:
    """Discrete shift function of the pair (H~, H) at 0 < lam < gap:
    the counting difference N_H(-inf, lam) - N_H~(-inf, lam).

    Rejects levels within a relative 1e-3 of either spectrum, and
    cross-checks that the count is stable under lam -> lam (1 +- 1e-3).
    """
    if not (0.0 < lam < gap):
        raise ValueError("lam must lie inside the spectral gap (0, gap)")
    dist = min(
        float(np.min(np.abs(D.eigs_H - lam))),
        float(np.min(np.abs(D.eigs_Ht - lam))),
    )
    if dist < 1e-3 * lam:
        raise UnstableLevelError(
            f"level {lam!r} is within relative 1e-3 of a discrete eigenvalue"
        )

    def count(level):
        return int(np.searchsorted(D.eigs_H, level)) - int(np.searchsorted(D.eigs_Ht, level))

    val = count(lam)
    if count(lam * (1.0 - 1e-3)) != val or count(lam * (1.0 + 1e-3)) != val:
        raise UnstableLevelError(f"count at {lam!r} changes under 1e-3 perturbation")
    return val


def resolvent_trace_diff(D: DiscretizedPair, z: float) -> float:
    """sum_j [1/(mu~_j - z) - 1/(mu_j - z)] over the discrete spectra.

    Third, fully independent estimate of Tr((H~-z)^{-1} - (H-z)^{-1});
    summed as pairwise differences of the sorted spectra so the large-j
    contributions cancel before accumulation.
    """
    if not z < 0.0:
        raise ValueError("z must be negative")
    terms = 1.0 / (D.eigs_Ht - z) - 1.0 / (D.eigs_H - z)
    return float(np.sum(terms))


def gap_eigenvalue_rows(D: DiscretizedPair, gap: float):
    """(index, eig_H, eig_H~) rows below the essential-spectrum bottom."""
    k = max(
        int(np.searchsorted(D.eigs_H, gap)),
        int(np.searchsorted(D.eigs_Ht, gap)),
    )
    return [
        (j, float(D.eigs_H[j]), float(D.eigs_Ht[j]))
        for j in range(min(k, D.eigs_H.size))
    ]


def kernel_via_shooting(
    path: OperatorPath, eps_svd: float = 1e-8, steps: int = 8192
) -> Tuple[int, int]:
    """Kernel dimensions of d/dt + A(t) and -d/dt + A(t) by shooting.

    A solution of u' = -A u is square-integrable iff it launches from the
    negative spectral subspace of A- and lands in the positive subspace of
    A+; the dimension of the propagated intersection is read off from
    principal angles (singular values of the stacked orthonormal bases).
    The adjoint problem mirrors the subspaces. Angles whose cosines fall
    in the indecisive band (1 - 1e-6, 1 - 1e-10) abort rather than guess.
    """
    A_minus, A_plus = path.endpoints()
    path.tail_gap()  # endpoints invertible, so the subspaces split cleanly
    R = path.support_radius
    if R == 0.0:
        return 0, 0
    ts = np.linspace(-R, R, steps + 1)
    h = ts[1] - ts[0]
    mids = ts[:-1] + 0.5 * h
    A_a = path.values(ts[:-1])
    A_m = path.values(mids)
    A_b = path.values(ts[1:])

    w_m, U_m = hm.eigh(A_minus)
    w_p, U_p = hm.eigh(A_plus)

    dims = []
    for sign in (-1.0, 1.0):
        # u' = sign * A(t) u; decay at -inf needs launch modes with
        # sign*mu > 0 growing backward, i.e. eigenvalues of A- with
        # -sign * mu < 0 ... concretely: for u' = -A u take mu < 0 at -inf
        # and mu > 0 at +inf; the adjoint flips both.
        if sign < 0:
            launch = U_m[:, w_m < 0.0]
            land = U_p[:, w_p > 0.0]
        else:
            launch = U_m[:, w_m > 0.0]
            land = U_p[:, w_p < 0.0]
        if launch.shape[1] == 0 or land.shape[1] == 0:
            dims.append(0)
            continue
        Ma = np.ascontiguousarray(sign * A_a)
        Mm = np.ascontiguousarray(sign * A_m)
        Mb = np.ascontiguousarray(sign * A_b)
        Y = kernels.rk4_first_order(Ma, Mm, Mb, np.ascontiguousarray(launch), float(h))
        arrived = np.linalg.qr(Y[-1])[0]
        cosines = np.linalg.svd(arrived.conj().T @ land, compute_uv=False)
        for s in cosines:
            if 1.0 - 1e-6 < s < 1.0 - 1e-10:
                raise IllConditionedIntersectionError(
                    f"principal angle cosine {s!r} is too close to the threshold"
                )
        dims.append(int(np.sum(cosines >= 1.0 - eps_svd)))
    return dims[0], dims[1]
