"""Operator paths A(t) = A- + sum_i phi_i(t) C_i.

Each term is a scalar profile (monotone 0 -> 1, closed-form derivative)
times a fixed Hermitian coefficient, so derivatives are exact and compact
support, where claimed, is exact. Profile derivatives take a ``side``
argument (+1 right-continuous, -1 left-continuous) so that integrators can
use one-sided limits at the finitely many kink points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import hermitian as hm
from .errors import NotInvertibleAtInfinityError

DERIV_TAIL_TOL = 1e-14


def _as_array(t):
    ts = np.asarray(t, dtype=np.float64)
    return ts, ts.ndim == 0


class Profile:
    """Scalar switching profile: monotone, phi(-inf)=0, phi(+inf)=1."""

    center: float
    width: float

    def value(self, t):
        raise NotImplementedError

    def deriv(self, t, side: int = 1):
        raise NotImplementedError

    def reflect(self) -> "Profile":
        """Profile psi with psi(t) = 1 - phi(-t) (time reversal)."""
        raise NotImplementedError

    # (lo, hi) outside which the derivative vanishes identically, or None
    exact_support: Optional[Tuple[float, float]] = None

    def kinks(self) -> Tuple[float, ...]:
        """Points where the derivative jumps (used for one-sided stages
        and quadrature splitting)."""
        return ()

    def tail_radius(self, deriv_tol: float) -> float:
        """Radius R with |phi'(t)| <= deriv_tol for all |t| >= R."""
        raise NotImplementedError


@dataclass(frozen=True)
class TanhProfile(Profile):
    """phi(t) = (1 + tanh((t - center)/width)) / 2; smooth, full support."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def value(self, t):
        ts, scalar = _as_array(t)
        v = 0.5 * (1.0 + np.tanh((ts - self.center) / self.width))
        return float(v) if scalar else v

    def deriv(self, t, side: int = 1):
        ts, scalar = _as_array(t)
        x = np.abs(ts - self.center) / self.width
        # sech^2(x) = 4 e^{-2x} / (1 + e^{-2x})^2, overflow-free form
        e = np.exp(-2.0 * x)
        v = (2.0 / self.width) * e / (1.0 + e) ** 2
        return float(v) if scalar else v

    def reflect(self):
        return TanhProfile(-self.center, self.width)

    exact_support = None

    def tail_radius(self, deriv_tol):
        # (2/w) e^{-2u/w} <= tol  at offset u from the center
        u = 0.5 * self.width * np.log(2.0 / (self.width * deriv_tol))
        return abs(self.center) + max(u, 0.0)


@dataclass(frozen=True)
class SmoothstepProfile(Profile):
    """Quintic smoothstep on [center - width, center + width]; C^2, exactly
    compact derivative support."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def _x(self, ts):
        return np.clip((ts - (self.center - self.width)) / (2.0 * self.width), 0.0, 1.0)

    def value(self, t):
        ts, scalar = _as_array(t)
        x = self._x(ts)
        v = x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
        return float(v) if scalar else v

    def deriv(self, t, side: int = 1):
        ts, scalar = _as_array(t)
        x = self._x(ts)
        v = 30.0 * x * x * (1.0 - x) ** 2 / (2.0 * self.width)
        return float(v) if scalar else v

    def reflect(self):
        return SmoothstepProfile(-self.center, self.width)

    @property
    def exact_support(self):
        return (self.center - self.width, self.center + self.width)

    def tail_radius(self, deriv_tol):
        return abs(self.center) + self.width


@dataclass(frozen=True)
class RampProfile(Profile):
    """Linear ramp on [center - width, center + width]; derivative is a
    step function, so one-sided evaluation matters at the two edges."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def value(self, t):
        ts, scalar = _as_array(t)
        v = np.clip((ts - (self.center - self.width)) / (2.0 * self.width), 0.0, 1.0)
        return float(v) if scalar else v

    def deriv(self, t, side: int = 1):
        ts, scalar = _as_array(t)
        lo = self.center - self.width
        hi = self.center + self.width
        if side >= 0:
            mask = (ts >= lo) & (ts < hi)
        else:
            mask = (ts > lo) & (ts <= hi)
        v = np.where(mask, 1.0 / (2.0 * self.width), 0.0)
        return float(v) if scalar else v

    def reflect(self):
        return RampProfile(-self.center, self.width)

    @property
    def exact_support(self):
        return (self.center - self.width, self.center + self.width)

    def kinks(self):
        return (self.center - self.width, self.center + self.width)

    def tail_radius(self, deriv_tol):
        return abs(self.center) + self.width


@dataclass(frozen=True)
class TruncatedProfile(Profile):
    """Freeze a profile beyond [-n, n] with linear interpolation to its
    limits on [-n-1, -n] and [n, n+1]; exactly compact with radius n + 1."""

    base: Profile
    n: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError("truncation radius must be positive")

    @property
    def center(self):
        return self.base.center

    @property
    def width(self):
        return self.base.width

    def value(self, t):
        ts, scalar = _as_array(t)
        n = self.n
        lo_val = float(self.base.value(-n))
        hi_val = float(self.base.value(n))
        v = np.asarray(self.base.value(ts), dtype=np.float64).copy()
        left_ramp = (ts >= -n - 1.0) & (ts < -n)
        right_ramp = (ts > n) & (ts <= n + 1.0)
        v = np.where(ts < -n - 1.0, 0.0, v)
        v = np.where(left_ramp, lo_val * (ts + n + 1.0), v)
        v = np.where(right_ramp, hi_val + (ts - n) * (1.0 - hi_val), v)
        v = np.where(ts > n + 1.0, 1.0, v)
        return float(v) if scalar else v

    def deriv(self, t, side: int = 1):
        ts, scalar = _as_array(t)
        n = self.n
        lo_val = float(self.base.value(-n))
        hi_val = float(self.base.value(n))
        v = np.asarray(self.base.deriv(ts, side), dtype=np.float64).copy()
        if side >= 0:
            left_ramp = (ts >= -n - 1.0) & (ts < -n)
            right_ramp = (ts >= n) & (ts < n + 1.0)
            inner = (ts >= -n) & (ts < n)
        else:
            left_ramp = (ts > -n - 1.0) & (ts <= -n)
            right_ramp = (ts > n) & (ts <= n + 1.0)
            inner = (ts > -n) & (ts <= n)
        out = np.zeros_like(v)
        out = np.where(inner, v, out)
        out = np.where(left_ramp, lo_val, out)
        out = np.where(right_ramp, 1.0 - hi_val, out)
        return float(out) if scalar else out

    def reflect(self):
        return TruncatedProfile(self.base.reflect(), self.n)

    @property
    def exact_support(self):
        return (-self.n - 1.0, self.n + 1.0)

    def kinks(self):
        inner = tuple(k for k in self.base.kinks() if -self.n < k < self.n)
        return tuple(sorted(set((-self.n - 1.0, -self.n, self.n, self.n + 1.0) + inner)))

    def tail_radius(self, deriv_tol):
        return self.n + 1.0


PROFILE_KINDS = {
    "tanh-sigmoid": TanhProfile,
    "smoothstep-compact": SmoothstepProfile,
    "piecewise-linear-ramp": RampProfile,
}


def make_profile(kind: str, center: float, width: float) -> Profile:
    try:
        cls = PROFILE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown profile kind {kind!r}") from None
    return cls(float(center), float(width))


class OperatorPath:
    """A(t) = A- + sum_i phi_i(t) C_i with Hermitian coefficients.

    Immutable; all evaluation methods are pure. ``support_radius`` is the
    radius beyond which the derivative is exactly zero (compact profiles)
    or below 1e-14 in max-entry norm (smooth tails).
    """

    def __init__(self, A_minus, terms: Sequence[Tuple[Profile, np.ndarray]] = ()):
        self.A_minus = hm.hermitian(A_minus)
        self.dim = self.A_minus.shape[0]
        checked = []
        for prof, coeff in terms:
            C = hm.hermitian(coeff)
            if C.shape != self.A_minus.shape:
                raise ValueError("coefficient dimension mismatch")
            checked.append((prof, C))
        self.terms = tuple(checked)
        self.exactly_compact = all(p.exact_support is not None for p, _ in self.terms)
        self.support_radius = self._support_radius()

    def _support_radius(self) -> float:
        if not self.terms:
            return 0.0
        nterms = len(self.terms)
        radius = 0.0
        for prof, C in self.terms:
            scale = max(hm.max_abs(C), 1e-300)
            radius = max(radius, prof.tail_radius(DERIV_TAIL_TOL / (nterms * scale)))
        return radius

    # -- evaluation ---------------------------------------------------------

    def value(self, t: float) -> np.ndarray:
        A = self.A_minus.copy()
        for prof, C in self.terms:
            A += prof.value(t) * C
        return A

    def derivative(self, t: float, side: int = 1) -> np.ndarray:
        A = np.zeros_like(self.A_minus)
        for prof, C in self.terms:
            A += prof.deriv(t, side) * C
        return A

    def values(self, ts) -> np.ndarray:
        """Stacked values A(t_k), shape (len(ts), d, d)."""
        ts = np.asarray(ts, dtype=np.float64)
        out = np.broadcast_to(self.A_minus, (ts.size, self.dim, self.dim)).copy()
        for prof, C in self.terms:
            out += prof.value(ts)[:, None, None] * C
        return out

    def derivatives(self, ts, side: int = 1) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        out = np.zeros((ts.size, self.dim, self.dim), dtype=np.complex128)
        for prof, C in self.terms:
            out += prof.deriv(ts, side)[:, None, None] * C
        return out

    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        A_plus = self.A_minus.copy()
        for _, C in self.terms:
            A_plus += C
        return self.A_minus.copy(), A_plus

    def potentials(self, t: float, side: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """(Q, Q~) = (A^2 - A', A^2 + A') at time t."""
        A = self.value(t)
        Ap = self.derivative(t, side)
        sq = A @ A
        return sq - Ap, sq + Ap

    # -- derived quantities -------------------------------------------------

    def kinks(self) -> Tuple[float, ...]:
        pts = set()
        for prof, _ in self.terms:
            pts.update(prof.kinks())
        return tuple(sorted(pts))

    def total_variation(self, tol: float = 1e-10) -> float:
        """Integral of the trace norm of A'(t), by adaptive Simpson."""
        if not self.terms:
            return 0.0
        R = self.support_radius
        splits = {-R, R}
        for prof, _ in self.terms:
            splits.add(prof.center)
            if prof.exact_support is not None:
                lo, hi = prof.exact_support
                splits.update((lo, hi))
        splits.update(self.kinks())
        pts = sorted(x for x in splits if -R <= x <= R)
        if pts[0] > -R:
            pts.insert(0, -R)
        if pts[-1] < R:
            pts.append(R)

        def f(t):
            return hm.trace_norm(self.derivative(t))

        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                total += _adaptive_simpson(f, a, b, tol / max(len(pts) - 1, 1))
        return total

    def truncate(self, n: float) -> "OperatorPath":
        """Freeze the path to its limits beyond [-n-1, n+1], linearly
        interpolating on the two unit buffers. Values on [-n, n] and the
        endpoints are unchanged."""
        if not n > 0:
            raise ValueError("truncation radius must be positive")
        new_terms = []
        for prof, C in self.terms:
            sup = prof.exact_support
            if sup is not None and sup[0] >= -n and sup[1] <= n:
                new_terms.append((prof, C))
            else:
                new_terms.append((TruncatedProfile(prof, float(n)), C))
        return OperatorPath(self.A_minus, new_terms)

    def compress(self, P) -> "OperatorPath":
        """Conjugate the path by an orthogonal projection: t -> P A(t) P."""
        P = hm.hermitian(P)
        if hm.max_abs(P @ P - P) > 1e-10 * max(1.0, hm.max_abs(P)):
            raise ValueError("P is not an orthogonal projection (P^2 != P)")
        new_terms = [(prof, P @ C @ P) for prof, C in self.terms]
        return OperatorPath(P @ self.A_minus @ P, new_terms)

    def reverse(self) -> "OperatorPath":
        """The time-reversed path t -> A(-t), re-expressed with monotone
        profiles: A(-t) = A+ + sum_i (1 - phi_i(-t)) (-C_i)."""
        _, A_plus = self.endpoints()
        new_terms = [(prof.reflect(), -C) for prof, C in self.terms]
        return OperatorPath(A_plus, new_terms)

    def tail_gap(self) -> float:
        """Certified bottom a = min spec(A+-)^2 of the constant-tail
        essential spectrum; requires both endpoints invertible."""
        A_minus, A_plus = self.endpoints()
        mus = np.concatenate([hm.eigh(A_minus).eigenvalues, hm.eigh(A_plus).eigenvalues])
        if np.min(np.abs(mus)) <= 1e-10:
            raise NotInvertibleAtInfinityError(
                "an endpoint matrix has spectrum within 1e-10 of zero"
            )
        return float(np.min(mus**2))


def _adaptive_simpson(f, a, b, tol, max_depth: int = 40):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = f(0.5 * (a + m))
    rm = f(0.5 * (m + b))
    left = (m - a) / 6.0 * (fa + 4.0 * lm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * rm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(f, a, m, fa, lm, fm, left, tol / 2.0, depth - 1) + _simpson_rec(
        f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1
    )
