"""Spectral shift functions of Hermitian matrix pairs.

In finite dimension the shift function of a pair (A+, A-) is the integer
step function

    xi(lam) = #{eig of A- below lam} - #{eig of A+ below lam},

compactly supported between the extreme eigenvalues. The trace formula
check and the Abel-type transform both exploit piecewise constancy, so no
quadrature enters either evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from . import hermitian as hm
from .errors import AmbiguousAtBreakpointError

BREAKPOINT_TOL = 1e-12


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function.

    ``values[k]`` is the value on (breakpoints[k-1], breakpoints[k]), with
    values[0] left of the first breakpoint and values[-1] right of the
    last. Stored canonically: strictly increasing breakpoints (separation
    > 1e-12) and no equal adjacent values.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.size != b.size + 1:
            raise ValueError("values must have one more entry than breakpoints")
        if b.size > 1 and np.min(np.diff(b)) <= BREAKPOINT_TOL:
            raise ValueError("breakpoints must be strictly increasing (sep > 1e-12)")
        if v.size > 1 and np.any(v[1:] == v[:-1]):
            raise ValueError("adjacent values must differ (not canonical)")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @staticmethod
    def from_jumps(points, deltas, base: float = 0.0) -> "StepFunction":
        """Build from jump locations and sizes, clustering points closer
        than 1e-12 and dropping jumps that cancel."""
        pts = np.asarray(points, dtype=np.float64)
        dls = np.asarray(deltas, dtype=np.float64)
        order = np.argsort(pts, kind="stable")
        pts, dls = pts[order], dls[order]
        cb, cd = [], []
        for p, dl in zip(pts, dls):
            if cb and p - cb[-1] <= BREAKPOINT_TOL:
                cd[-1] += dl
            else:
                cb.append(p)
                cd.append(dl)
        bks, vals = [], [base]
        for p, dl in zip(cb, cd):
            if dl != 0.0:
                bks.append(p)
                vals.append(vals[-1] + dl)
        return StepFunction(np.array(bks), np.array(vals))

    def value_at(self, x: float) -> float:
        """Value on the open interval containing x; breakpoints are
        rejected (the function is an a.e.-defined object)."""
        b = self.breakpoints
        if b.size and np.min(np.abs(b - x)) <= BREAKPOINT_TOL:
            raise AmbiguousAtBreakpointError(f"{x!r} is within 1e-12 of a breakpoint")
        return float(self.values[np.searchsorted(b, x)])

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.breakpoints.copy(), -self.values)

    def is_compact(self) -> bool:
        return self.values.size == 1 and self.values[0] == 0.0 or (
            self.values[0] == 0.0 and self.values[-1] == 0.0
        )

    def integral(self) -> float:
        """Integral over the line; requires zero tails."""
        if not self.is_compact():
            raise ValueError("integral defined only for compactly supported steps")
        b, v = self.breakpoints, self.values
        return float(np.sum(v[1:-1] * np.diff(b))) if b.size > 1 else 0.0

    def csv_rows(self):
        """(breakpoint, value_left, value_right) rows for serialization."""
        b, v = self.breakpoints, self.values
        return [(float(b[k]), float(v[k]), float(v[k + 1])) for k in range(b.size)]


def spectral_shift(A_plus, A_minus) -> StepFunction:
    """Shift function of the pair (A+, A-), by eigenvalue counting.

    Jumps +1 at eigenvalues of A- and -1 at eigenvalues of A+; coincident
    contributions (within 1e-12) merge and may cancel.
    """
    Ap = hm.hermitian(A_plus)
    Am = hm.hermitian(A_minus)
    if Ap.shape != Am.shape:
        raise ValueError("dimension mismatch")
    w_plus = hm.eigh(Ap).eigenvalues
    w_minus = hm.eigh(Am).eigenvalues
    points = np.concatenate([w_minus, w_plus])
    deltas = np.concatenate([np.ones(w_minus.size), -np.ones(w_plus.size)])
    return StepFunction.from_jumps(points, deltas)


def verify_trace_formula(
    A_plus,
    A_minus,
    f: Callable[[float], float],
    f_prime: Optional[Callable[[float], float]] = None,
) -> Tuple[float, float, float]:
    """Both sides of tr(f(A+) - f(A-)) = integral xi f' and their gap.

    The right side telescopes exactly over the constant steps of xi,
    sum_k v_k (f(b_{k+1}) - f(b_k)), so no quadrature error enters;
    ``f_prime`` documents the integrand but is never evaluated.
    """
    lhs = float(
        np.real(np.trace(hm.apply_function(A_plus, f)) - np.trace(hm.apply_function(A_minus, f)))
    )
    xi = spectral_shift(A_plus, A_minus)
    b, v = xi.breakpoints, xi.values
    rhs = 0.0
    if b.size > 1:
        fb = np.array([f(float(x)) for x in b], dtype=np.float64)
        rhs = float(np.sum(v[1:-1] * np.diff(fb)))
    return lhs, rhs, abs(lhs - rhs)


def abel_transform(eta: StepFunction, lam: float) -> float:
    """(1/pi) * integral of eta(s) / sqrt(lam - s^2) over (-sqrt(lam), sqrt(lam)).

    Evaluated in closed form: each step interval contributes its value
    times (arcsin(q/sqrt(lam)) - arcsin(p/sqrt(lam)))/pi with the interval
    clipped to (-sqrt(lam), sqrt(lam)). Ratios are clamped to [-1, 1] so
    rounding cannot step over the branch points; a constant eta == c on
    the whole window maps to exactly c.
    """
    if not lam > 0.0:
        raise ValueError("lam must be positive")
    root = float(np.sqrt(lam))
    edges = np.concatenate([[-root], np.clip(eta.breakpoints, -root, root), [root]])
    ratios = np.clip(edges / root, -1.0, 1.0)
    angles = np.arcsin(ratios)
    return float(np.sum(eta.values * np.diff(angles)) / np.pi)
