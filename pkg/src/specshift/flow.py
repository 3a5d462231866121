"""Spectral flow of a Hermitian path through a fixed level.

The flow is computed from jumps of the counting function
N(t) = #{eigenvalues of A(t) below the level} between grid points, never
from pairing eigenvalue branches, so ordering ambiguities at crossings of
unrelated branches cannot miscount. Each jump is localized by bisection;
tangential touch-and-return inside one bracket changes no count and is
invisible, matching the net-crossing definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import hermitian as hm
from .errors import OnEigenvalueError, UnresolvedCrossingError
from .paths import OperatorPath


@dataclass(frozen=True)
class CrossingEvent:
    t_cross: float
    direction: int  # +1 rightwards (eigenvalue increasing through the level)
    multiplicity: int
    bracket_width: float


def eigenvalue_branches(path: OperatorPath, t_grid) -> np.ndarray:
    """Ascending eigenvalues of A(t) for each grid point; shape (nt, d)."""
    ts = np.asarray(t_grid, dtype=np.float64)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("t_grid must be strictly increasing with >= 2 points")
    out = np.empty((ts.size, path.dim))
    for k, A in enumerate(path.values(ts)):
        out[k] = hm.eigh(A).eigenvalues
    return out


def _count(path: OperatorPath, t: float, level: float, jiggle: float = 0.0) -> Tuple[float, int]:
    """count_below at time t, nudging t deterministically if the level sits
    on an eigenvalue there. Returns the (possibly nudged) t and the count."""
    for shift in (0.0, 1.0, -1.0, 2.0, -2.0):
        tt = t + shift * jiggle
        try:
            return tt, hm.count_below(hm.eigh(path.value(tt)).eigenvalues, level)
        except OnEigenvalueError:
            if jiggle == 0.0:
                raise
    raise UnresolvedCrossingError(
        f"level {level!r} sits on an eigenvalue near t={t!r} despite nudging"
    )


def spectral_flow(
    path: OperatorPath,
    level: float,
    t_grid,
    refine_tol: float = 1e-6,
) -> Tuple[int, List[CrossingEvent]]:
    """Net signed eigenvalue crossings of ``level`` along the path.

    Returns (flow, events): flow = sum of direction * multiplicity. The
    grid must cover the support of the derivative, and the level must stay
    off the endpoint spectra (OnEigenvalueError otherwise). Counting jumps
    wider than one eigenvalue per bracket are split by bisection down to
    ``refine_tol``.
    """
    ts = np.asarray(t_grid, dtype=np.float64)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("t_grid must be strictly increasing with >= 2 points")
    R = path.support_radius
    if ts[0] > -R or ts[-1] < R:
        raise ValueError("t_grid must cover [-support_radius, support_radius]")

    # endpoints stand in for t = -+infinity and must be clean (checked
    # first, so a level on the limit spectra fails loudly); interior nodes
    # may be nudged off accidental exact crossings
    _count(path, float(ts[0]), level)
    _count(path, float(ts[-1]), level)
    spacing = float(np.min(np.diff(ts)))
    nodes: List[float] = []
    counts: List[int] = []
    for k, t in enumerate(ts):
        jiggle = 0.0 if k in (0, ts.size - 1) else 0.05 * spacing
        tt, c = _count(path, float(t), level, jiggle=jiggle)
        nodes.append(tt)
        counts.append(c)

    events: List[CrossingEvent] = []
    for k in range(ts.size - 1):
        if counts[k] != counts[k + 1]:
            _refine(path, level, nodes[k], counts[k], nodes[k + 1], counts[k + 1],
                    refine_tol, events)

    events.sort(key=lambda e: e.t_cross)
    total = sum(e.direction * e.multiplicity for e in events)
    # telescoping consistency: net flow equals the endpoint count difference
    if total != counts[0] - counts[-1]:
        raise UnresolvedCrossingError(
            "event decomposition does not telescope to the endpoint counts"
        )
    return total, events


def _refine(path, level, tl, cl, tr, cr, tol, events, depth: int = 0):
    jump = cr - cl
    if jump == 0:
        return
    if abs(jump) > path.dim:
        raise RuntimeError("count jump exceeds the matrix dimension (internal error)")
    width = tr - tl
    if width <= tol:
        events.append(
            CrossingEvent(
                t_cross=0.5 * (tl + tr),
                direction=-int(np.sign(jump)),
                multiplicity=abs(jump),
                bracket_width=width,
            )
        )
        return
    if depth > 200:
        raise UnresolvedCrossingError(f"bracket [{tl}, {tr}] failed to refine to {tol}")
    tm = 0.5 * (tl + tr)
    tm, cm = _count(path, tm, level, jiggle=0.01 * width)
    if not (tl < tm < tr):
        raise UnresolvedCrossingError(f"bracket [{tl}, {tr}] collapsed while nudging")
    _refine(path, level, tl, cl, tm, cm, tol, events, depth + 1)
    _refine(path, level, tm, cm, tr, cr, tol, events, depth + 1)
