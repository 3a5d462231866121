"""Jost solutions of the matrix Schrodinger equation -F'' + Q F = z F and
the trace identity they certify.

For a path with exactly compact derivative support and real z < 0, the two
solutions F+ and F- are normalized to pure decaying exponentials at +T and
-T, integrated across the grid by fixed-step RK4 (backward for F+, forward
for F-). From them: the constant Wronskian, the mode-splitting scattering
coefficients, resolvent kernel diagonals for both partner potentials
Q = A^2 - A' and Q~ = A^2 + A', and two independent evaluations of
Tr((H~ - z)^{-1} - (H - z)^{-1}) - a boundary-term formula exact up to the
exponential tails, and composite Simpson over the kernel diagonals. The
closed-form right-hand side (1/2z) tr(g_z(A+) - g_z(A-)) depends only on
the endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import hermitian as hm
from . import kernels
from .errors import (
    DynamicRangeExceededError,
    TruncateFirstError,
    UnexpectedBoundStateError,
)
from .paths import OperatorPath

# Largest tolerated exponent kappa_max * 2T of the mode dynamic range. The
# growing/decaying mode ratio e^{2 kappa T} stays far from overflow and the
# dominant-mode quantities used downstream remain well conditioned up to
# here; only the reflection-type coefficients b, d lose digits sooner.
MAX_EXPONENT = 120.0

NODE_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with N (odd) nodes on [-T, T], so t = 0 is a node."""

    T: float
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError("N must be odd and >= 3")

    @property
    def h(self) -> float:
        return 2.0 * self.T / (self.N - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.N)

    def node_index(self, t: float) -> int:
        k = int(round((t + self.T) / self.h))
        if k < 0 or k >= self.N or abs(-self.T + k * self.h - t) > NODE_TOL:
            raise ValueError(f"{t!r} is not a grid node")
        return k


@dataclass(frozen=True)
class JostData:
    """Jost solutions and scattering data of one (path, z) problem."""

    grid: GridSpec
    z: float
    A_minus: np.ndarray
    A_plus: np.ndarray
    kappa_minus: np.ndarray
    kappa_plus: np.ndarray
    F_plus: np.ndarray  # (N, d, d) per node
    Fp_plus: np.ndarray
    F_minus: np.ndarray
    Fp_minus: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    W_ref: np.ndarray  # Wronskian at the t = 0 node, used as "the" Wronskian
    mode_residual: float

    @property
    def dim(self) -> int:
        return self.A_minus.shape[0]


def _stage_potentials(path: OperatorPath, grid: GridSpec):
    """Per-interval stage values of Q(t) = A(t)^2 - A'(t).

    Node values are one-sided limits from inside each interval, so steps
    never straddle a node-aligned derivative jump.
    """
    ts = grid.nodes()
    mids = ts[:-1] + 0.5 * grid.h
    A_nodes = path.values(ts)
    Asq = A_nodes @ A_nodes
    Q_right = Asq - path.derivatives(ts, side=1)
    Q_left = Asq - path.derivatives(ts, side=-1)
    A_mid = path.values(mids)
    Qm = A_mid @ A_mid - path.derivatives(mids, side=1)
    Qa = np.ascontiguousarray(Q_right[:-1])
    Qb = np.ascontiguousarray(Q_left[1:])
    return Qa, np.ascontiguousarray(Qm), Qb, A_nodes


def _rel_defect(X, Y) -> float:
    return hm.max_abs(X - Y) / max(hm.max_abs(X), 1e-300)


def solve_jost(path: OperatorPath, z: float, grid: GridSpec) -> JostData:
    """Integrate both Jost solutions and extract the scattering data.

    Requires an exactly compact path (truncate first otherwise), real
    z < 0, and grid.T at least the support radius. Refuses problems whose
    mode dynamic range exceeds e^MAX_EXPONENT.
    """
    z = float(z)
    if not z < 0.0:
        raise ValueError("z must be real and negative")
    if not path.exactly_compact:
        raise TruncateFirstError(
            "path derivative support is not exactly compact; apply truncate() first"
        )
    if grid.T < path.support_radius - NODE_TOL:
        raise ValueError("grid.T must be at least the path support radius")

    A_minus, A_plus = path.endpoints()
    kappa_minus = hm.decay_rate(A_minus, z)
    kappa_plus = hm.decay_rate(A_plus, z)
    kmax = max(
        float(np.max(hm.eigh(kappa_minus).eigenvalues)),
        float(np.max(hm.eigh(kappa_plus).eigenvalues)),
    )
    if kmax * 2.0 * grid.T > MAX_EXPONENT:
        raise DynamicRangeExceededError(
            f"kappa_max * 2T = {kmax * 2.0 * grid.T:.1f} exceeds {MAX_EXPONENT}"
        )

    Qa, Qm, Qb, A_nodes = _stage_potentials(path, grid)
    h = grid.h
    T = grid.T

    # exact boundary data: F+(T) = e^{-kappa+ T}, F-(-T) = e^{-kappa- T}
    E_plus = hm.apply_function(A_plus, lambda s: np.exp(-T * np.sqrt(s * s - z)))
    E_minus = hm.apply_function(A_minus, lambda s: np.exp(-T * np.sqrt(s * s - z)))

    F_plus, Fp_plus = kernels.rk4_second_order(
        Qa, Qm, Qb, z, np.ascontiguousarray(E_plus),
        np.ascontiguousarray(-kappa_plus @ E_plus), h, True
    )
    F_minus, Fp_minus = kernels.rk4_second_order(
        Qa, Qm, Qb, z, np.ascontiguousarray(E_minus),
        np.ascontiguousarray(kappa_minus @ E_minus), h, False
    )

    a, b, res_m = _split_modes(
        F_plus[0], Fp_plus[0], A_minus, kappa_minus, T, z, outgoing=False
    )
    c, d, res_p = _split_modes(
        F_minus[-1], Fp_minus[-1], A_plus, kappa_plus, T, z, outgoing=True
    )
    mode_residual = max(res_m, res_p)
    if mode_residual > 1e-8:
        raise RuntimeError(f"mode-splitting reconstruction residual {mode_residual:.3e}")
    for name, coeff in (("a", a), ("c", c)):
        sv = np.linalg.svd(coeff, compute_uv=False)
        if sv[-1] <= 0.0 or sv[0] / sv[-1] > 1e12:
            raise UnexpectedBoundStateError(
                f"transmission coefficient {name} numerically singular "
                "(z appears to be an eigenvalue)"
            )

    mid = (grid.N - 1) // 2
    W_ref = _wronskian_at(F_plus, Fp_plus, F_minus, Fp_minus, mid)
    return JostData(
        grid=grid,
        z=z,
        A_minus=A_minus,
        A_plus=A_plus,
        kappa_minus=kappa_minus,
        kappa_plus=kappa_plus,
        F_plus=F_plus,
        Fp_plus=Fp_plus,
        F_minus=F_minus,
        Fp_minus=Fp_minus,
        a=a,
        b=b,
        c=c,
        d=d,
        W_ref=W_ref,
        mode_residual=mode_residual,
    )


def _split_modes(F, Fp, A_end, kappa, T, z, outgoing: bool):
    """Split boundary data into decaying/growing exponential modes.

    At -T (outgoing=False): F = e^{kappa T} a + e^{-kappa T} b.
    At +T (outgoing=True):  F = e^{kappa T} c + e^{-kappa T} d.
    Returns the two coefficients and the relative reconstruction defect.
    """
    kinv = hm.apply_function(A_end, lambda s: 1.0 / np.sqrt(s * s - z))
    ep = hm.apply_function(A_end, lambda s: np.exp(T * np.sqrt(s * s - z)))
    em = hm.apply_function(A_end, lambda s: np.exp(-T * np.sqrt(s * s - z)))
    kv = kinv @ Fp
    if outgoing:
        big = 0.5 * em @ (F + kv)  # c
        small = 0.5 * ep @ (F - kv)  # d
        rec_F = ep @ big + em @ small
        rec_Fp = kappa @ (ep @ big - em @ small)
    else:
        big = 0.5 * em @ (F - kv)  # a
        small = 0.5 * ep @ (F + kv)  # b
        rec_F = ep @ big + em @ small
        rec_Fp = kappa @ (em @ small - ep @ big)
    scale = max(hm.max_abs(F), hm.max_abs(Fp), 1e-300)
    res = max(hm.max_abs(rec_F - F), hm.max_abs(rec_Fp - Fp)) / scale
    return big, small, res


def _wronskian_at(F_plus, Fp_plus, F_minus, Fp_minus, k: int) -> np.ndarray:
    return F_plus[k].conj().T @ Fp_minus[k] - Fp_plus[k].conj().T @ F_minus[k]


def wronskian(J: JostData, node: int) -> np.ndarray:
    """W(F+, F-) = F+* F-' - F+'* F- at a grid node (t-independent for
    exact solutions; drift measures integration error)."""
    return _wronskian_at(J.F_plus, J.Fp_plus, J.F_minus, J.Fp_minus, node)


def wronskian_drift(J: JostData) -> float:
    """Max relative deviation of the per-node Wronskian from W_ref."""
    prod1 = np.swapaxes(J.F_plus.conj(), 1, 2) @ J.Fp_minus
    prod2 = np.swapaxes(J.Fp_plus.conj(), 1, 2) @ J.F_minus
    W = prod1 - prod2
    return float(np.max(np.abs(W - J.W_ref)) / max(hm.max_abs(J.W_ref), 1e-300))


def scattering_coefficients(J: JostData) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    return J.a, J.b, J.c, J.d


def wronskian_identities(J: JostData) -> Tuple[float, float]:
    """Relative defects of W = 2 kappa+ c and W = 2 a* kappa-."""
    r1 = _rel_defect(J.W_ref, 2.0 * J.kappa_plus @ J.c)
    r2 = _rel_defect(J.W_ref, 2.0 * J.a.conj().T @ J.kappa_minus)
    return r1, r2


def resolvent_diag(J: JostData, path: OperatorPath, node: int) -> Tuple[np.ndarray, np.ndarray]:
    """Kernel diagonals (R(t,t), R~(t,t)) at a grid node.

    R(t,t) = F-(t) W^{-1} F+*(t); the partner kernel is assembled from the
    first-order data, R~(t,t) = (1/z) G-(t) W^{-1} G+*(t) with
    G+- = F+-' + A F+-. Both are Hermitian up to integration error.
    """
    t = float(J.grid.nodes()[node])
    A = path.value(t)
    Winv = np.linalg.inv(J.W_ref)
    R = J.F_minus[node] @ Winv @ J.F_plus[node].conj().T
    G_minus = J.Fp_minus[node] + A @ J.F_minus[node]
    G_plus = J.Fp_plus[node] + A @ J.F_plus[node]
    R_tilde = (1.0 / J.z) * G_minus @ Winv @ G_plus.conj().T
    return R, R_tilde


def _kernel_trace_rows(J: JostData, path: OperatorPath) -> np.ndarray:
    """tr(R~(t,t) - R(t,t)) at every node, vectorized."""
    ts = J.grid.nodes()
    A_nodes = path.values(ts)
    G_plus = J.Fp_plus + A_nodes @ J.F_plus
    G_minus = J.Fp_minus + A_nodes @ J.F_minus
    # tr(X W^{-1} Y*) = tr(W^{-1} Y* X)
    P = (1.0 / J.z) * (np.swapaxes(G_plus.conj(), 1, 2) @ G_minus)
    P -= np.swapaxes(J.F_plus.conj(), 1, 2) @ J.F_minus
    Winv = np.linalg.inv(J.W_ref)
    return np.einsum("ij,kji->k", Winv, P)


def callias_lhs_boundary(J: JostData, path: OperatorPath, r_eval: float) -> float:
    """Boundary-term evaluation of Tr((H~-z)^{-1} - (H-z)^{-1}).

    Equals (1/z) tr((W*)^{-1} F-* (F+' + A F+)) evaluated at +r and -r and
    differenced; exact for the integral over [-r, r], and off the full-line
    trace only by the exponential mode tails beyond r.
    """
    if r_eval < path.support_radius - NODE_TOL:
        raise ValueError("r_eval must be at least the path support radius")
    k_hi = J.grid.node_index(r_eval)
    k_lo = J.grid.node_index(-r_eval)
    Wc_inv = np.linalg.inv(J.W_ref.conj().T)

    def phi(k: int) -> complex:
        t = float(J.grid.nodes()[k])
        A = path.value(t)
        G = J.Fp_plus[k] + A @ J.F_plus[k]
        return np.trace(Wc_inv @ J.F_minus[k].conj().T @ G) / J.z

    val = phi(k_hi) - phi(k_lo)
    return float(np.real(val))


def callias_lhs_quadrature(J: JostData, path: OperatorPath) -> float:
    """Composite Simpson of tr(R~(t,t) - R(t,t)) over the whole grid."""
    g = _kernel_trace_rows(J, path)
    h = J.grid.h
    n = J.grid.N
    acc = g[0] + g[n - 1] + 4.0 * np.sum(g[1:n - 1:2]) + 2.0 * np.sum(g[2:n - 2:2])
    return float(np.real(acc * h / 3.0))


def callias_rhs(A_plus, A_minus, z: float) -> float:
    """(1/2z) tr(g_z(A+) - g_z(A-)) with g_z(s) = s/sqrt(s^2 - z).

    Evaluated both spectrally and as (1/2z) tr(kappa+^{-1} A+ -
    kappa-^{-1} A-); the two agree to 1e-12 by construction and the first
    is returned.
    """
    z = float(z)
    if not z < 0.0:
        raise ValueError("z must be real and negative")
    Ap = hm.hermitian(A_plus)
    Am = hm.hermitian(A_minus)
    g_diff = np.trace(hm.regularized_sign(Ap, z)) - np.trace(hm.regularized_sign(Am, z))
    v1 = float(np.real(g_diff)) / (2.0 * z)
    kp_inv = hm.apply_function(Ap, lambda s: 1.0 / np.sqrt(s * s - z))
    km_inv = hm.apply_function(Am, lambda s: 1.0 / np.sqrt(s * s - z))
    v2 = float(np.real(np.trace(kp_inv @ Ap) - np.trace(km_inv @ Am))) / (2.0 * z)
    if abs(v1 - v2) > 1e-12 * (1.0 + abs(v1)):
        raise RuntimeError(f"algebraic forms of the endpoint trace disagree: {v1} vs {v2}")
    return v1


def diagnostic_rows(J: JostData, path: OperatorPath):
    """Per-node (t, tr R, tr R~, |W(t) - W_ref|) rows for CSV dumps."""
    ts = J.grid.nodes()
    A_nodes = path.values(ts)
    Winv = np.linalg.inv(J.W_ref)
    G_plus = J.Fp_plus + A_nodes @ J.F_plus
    G_minus = J.Fp_minus + A_nodes @ J.F_minus
    P_t = (1.0 / J.z) * (np.swapaxes(G_plus.conj(), 1, 2) @ G_minus)
    P = np.swapaxes(J.F_plus.conj(), 1, 2) @ J.F_minus
    tr_R = np.einsum("ij,kji->k", Winv, P)
    tr_Rt = np.einsum("ij,kji->k", Winv, P_t)
    W_nodes = np.swapaxes(J.F_plus.conj(), 1, 2) @ J.Fp_minus
    W_nodes -= np.swapaxes(J.Fp_plus.conj(), 1, 2) @ J.F_minus
    drift = np.max(np.abs(W_nodes - J.W_ref), axis=(1, 2))
    return [
        (float(ts[k]), float(np.real(tr_R[k])), float(np.real(tr_Rt[k])), float(drift[k]))
        for k in range(ts.size)
    ]
