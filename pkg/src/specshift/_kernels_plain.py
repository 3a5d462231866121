"""Hot numerical kernels, written so the same source runs under numba's
nopython mode (see ``_kernels_numba``) or as plain interpreted numpy.

Only loops, scalar arithmetic and 2-d ``np.dot`` are used here; everything
else (validation, sorting, assembly of stage arrays) lives in the calling
modules.
"""

import numpy as np


def cyclic_jacobi(M):
    """Diagonalize a Hermitian matrix by cyclic-by-row complex Jacobi sweeps.

    Rotations run in a fixed (p, q) order, so the result is deterministic
    for a given input. Returns ``(diag, U, sweeps)`` with ``M ~ U diag U*``;
    ``diag`` is the unsorted real diagonal after convergence and ``sweeps``
    is the number of full sweeps used (-1 if the off-diagonal mass failed
    to drop below the tolerance).
    """
    n = M.shape[0]
    A = M.copy()
    U = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        U[i, i] = 1.0 + 0.0j
    if n == 1:
        d = np.zeros(1, dtype=np.float64)
        d[0] = A[0, 0].real
        return d, U, 0

    frob = 0.0
    for i in range(n):
        for j in range(n):
            frob += abs(A[i, j]) ** 2
    # purely relative: an absolute floor would let small-normed matrices
    # "converge" before any rotation has run
    tol_off = (1e-14) ** 2 * frob

    max_sweeps = 100
    sweeps = -1
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(A[p, q]) ** 2
        if off <= tol_off:
            sweeps = sweep
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = (t * c) * (apq / r)
                sc = np.conj(s)
                # A <- J* A J with J = I except J[pp]=J[qq]=c, J[pq]=s, J[qp]=-conj(s)
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - sc * aiq
                    A[i, q] = s * aip + c * aiq
                for j in range(n):
                    apj = A[p, j]
                    aqj = A[q, j]
                    A[p, j] = c * apj - s * aqj
                    A[q, j] = sc * apj + c * aqj
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real + 0.0j
                A[q, q] = A[q, q].real + 0.0j
                for i in range(n):
                    uip = U[i, p]
                    uiq = U[i, q]
                    U[i, p] = c * uip - sc * uiq
                    U[i, q] = s * uip + c * uiq

    d = np.zeros(n, dtype=np.float64)
    for i in range(n):
        d[i] = A[i, i].real
    return d, U, sweeps


def rk4_second_order(Qa, Qm, Qb, z, F0, G0, h, backward):
    """Fixed-step RK4 for the linear system F' = G, G' = (Q(t) - z) F.

    ``Qa``, ``Qm``, ``Qb`` hold, for each of the ``m`` grid intervals, the
    coefficient matrix at the left node, the midpoint and the right node;
    boundary values are one-sided limits taken from inside the interval, so
    node-aligned kinks of Q never leak across a step. Integration starts
    from node 0 (``backward=False``) or node m (``backward=True``) and all
    node values of F and G are stored.
    """
    m = Qa.shape[0]
    d = F0.shape[0]
    F = np.zeros((m + 1, d, d), dtype=np.complex128)
    G = np.zeros((m + 1, d, d), dtype=np.complex128)
    if backward:
        F[m] = F0
        G[m] = G0
        for k in range(m - 1, -1, -1):
            f = F[k + 1]
            g = G[k + 1]
            step = -h
            k1f = g
            k1g = np.dot(Qb[k], f) - z * f
            f2 = f + (0.5 * step) * k1f
            k2f = g + (0.5 * step) * k1g
            k2g = np.dot(Qm[k], f2) - z * f2
            f3 = f + (0.5 * step) * k2f
            k3f = g + (0.5 * step) * k2g
            k3g = np.dot(Qm[k], f3) - z * f3
            f4 = f + step * k3f
            k4f = g + step * k3g
            k4g = np.dot(Qa[k], f4) - z * f4
            F[k] = f + (step / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
            G[k] = g + (step / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    else:
        F[0] = F0
        G[0] = G0
        for k in range(m):
            f = F[k]
            g = G[k]
            k1f = g
            k1g = np.dot(Qa[k], f) - z * f
            f2 = f + (0.5 * h) * k1f
            k2f = g + (0.5 * h) * k1g
            k2g = np.dot(Qm[k], f2) - z * f2
            f3 = f + (0.5 * h) * k2f
            k3f = g + (0.5 * h) * k2g
            k3g = np.dot(Qm[k], f3) - z * f3
            f4 = f + h * k3f
            k4f = g + h * k3g
            k4g = np.dot(Qb[k], f4) - z * f4
            F[k + 1] = f + (h / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
            G[k + 1] = g + (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    return F, G


def rk4_first_order(Ma, Mm, Mb, Y0, h):
    """Fixed-step RK4 for Y' = M(t) Y, forward over m intervals.

    Stage coefficient matrices follow the same per-interval convention as
    :func:`rk4_second_order`. Returns Y at every node, shape (m+1, d, p).
    """
    m = Ma.shape[0]
    d = Y0.shape[0]
    p = Y0.shape[1]
    Y = np.zeros((m + 1, d, p), dtype=np.complex128)
    Y[0] = Y0
    for k in range(m):
        y = Y[k]
        k1 = np.dot(Ma[k], y)
        k2 = np.dot(Mm[k], y + (0.5 * h) * k1)
        k3 = np.dot(Mm[k], y + (0.5 * h) * k2)
        k4 = np.dot(Mb[k], y + h * k3)
        Y[k + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Y
