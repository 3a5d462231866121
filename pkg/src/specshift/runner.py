"""Scenario execution: builds the path, runs the requested experiments,
and assembles a deterministic RunReport.

Every check's tolerance is fixed here, not tuned at call sites. The
independent routes compared are:

  * callias        boundary formula vs Simpson quadrature vs discrete
                   eigenvalue sums vs the closed-form endpoint trace
  * index          discretized kernel counts vs shooting vs shift function
                   at zero vs spectral flow (exact integers)
  * ssf-gap        discrete counting shift vs the Abel transform of the
                   endpoint shift function inside the gap (exact integers)
  * flow           spectral flow vs the shift function at sampled levels,
                   plus reversal antisymmetry (exact integers)
  * trace-formula  spectral traces vs telescoped shift-function integrals
  * converge       truncation-radius and projection-rank sweeps of the
                   callias identity
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

import numpy as np

from . import discrete as dc
from . import hermitian as hm
from . import jost
from . import shift
from .errors import SpecshiftError
from .flow import spectral_flow
from .jost import GridSpec
from .paths import OperatorPath
from .report import RunReport
from .scenario import stream_rng, validate_config, build_path

CALLIAS_BOUNDARY_RTOL = 1e-4
CALLIAS_QUADRATURE_TOL = 1e-3
CALLIAS_DISCRETE_TOL = 1e-2
WRONSKIAN_TOL = 1e-6
TRACE_FORMULA_TOL = 1e-10
COMPRESSION_FULL_RANK_TOL = 1e-12

TRACE_TEST_FUNCTIONS = (
    ("square", lambda s: s * s),
    ("cube", lambda s: s * s * s),
    ("resolvent", lambda s: 1.0 / (s + 4.0)),
    ("arctan", np.arctan),
)


class _Context:
    """Per-scenario lazy caches shared between experiments."""

    def __init__(self, config: Dict[str, Any], threads: int = 1):
        self.config = config
        self.threads = max(1, threads)
        self.path = build_path(config)
        self._truncated: Optional[OperatorPath] = None
        self._jost: Dict[float, jost.JostData] = {}
        self._disc: Dict[tuple, dc.DiscretizedPair] = {}
        self._gap: Optional[float] = None

    @property
    def grid(self) -> GridSpec:
        g = self.config["grid"]
        return GridSpec(T=float(g["T"]), N=int(g["N"]))

    def disc_grid(self) -> GridSpec:
        d = self.config.get("disc")
        if d is None:
            return GridSpec(T=self.grid.T, N=min(self.grid.N, 2801))
        return GridSpec(T=float(d.get("T", self.grid.T)), N=int(d["N"]))

    def disc_cap(self) -> int:
        d = self.config.get("disc") or {}
        return int(d.get("cap", dc.DEFAULT_CAP))

    def threshold_fraction(self) -> float:
        d = self.config.get("disc") or {}
        return float(d.get("threshold_fraction", 0.1))

    def truncated(self) -> OperatorPath:
        if self._truncated is None:
            n = self.config.get("truncation")
            if n is None:
                if not self.path.exactly_compact:
                    raise SpecshiftError("experiment needs 'truncation' for this path")
                self._truncated = self.path
            else:
                self._truncated = self.path.truncate(float(n))
        return self._truncated

    def jost_data(self, z: float) -> jost.JostData:
        if z not in self._jost:
            self._jost[z] = jost.solve_jost(self.truncated(), z, self.grid)
        return self._jost[z]

    def solve_jost_many(self, zs) -> None:
        missing = [z for z in zs if z not in self._jost]
        if not missing:
            return
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(lambda z: jost.solve_jost(self.truncated(), z, self.grid), missing))
            for z, J in zip(missing, results):
                self._jost[z] = J
        else:
            for z in missing:
                self.jost_data(z)

    def disc_pair(self, which: str) -> dc.DiscretizedPair:
        """Discretized pair for 'raw' (index/ssf-gap) or 'truncated'
        (callias, matching the Jost operator exactly)."""
        grid = self.disc_grid()
        key = (which, grid.T, grid.N)
        if key not in self._disc:
            path = self.truncated() if which == "truncated" else self.path
            self._disc[key] = dc.build_discretized(path, grid, cap=self.disc_cap())
        return self._disc[key]

    def gap(self) -> float:
        if self._gap is None:
            self._gap = self.path.tail_gap()
        return self._gap

    def flow_grid(self, path: OperatorPath) -> np.ndarray:
        R = path.support_radius + 1.0
        return np.linspace(-R, R, 257)


def _record(experiment, check, passed, residual=None, tolerance=None, warning=False, **values):
    rec = {
        "experiment": experiment,
        "check": check,
        "pass": bool(passed),
        "values": {k: v for k, v in values.items()},
    }
    if residual is not None:
        rec["residual"] = float(residual)
    if tolerance is not None:
        rec["tolerance"] = float(tolerance)
    if warning:
        rec["warning"] = True
    return rec


def _exp_callias(ctx: _Context, report: RunReport) -> None:
    zs = [float(z) for z in ctx.config["z_list"]]
    ctx.solve_jost_many(zs)
    tpath = ctx.truncated()
    A_minus, A_plus = tpath.endpoints()
    D = ctx.disc_pair("truncated")
    coarse_N = D.grid.N // 2 + 1 if (D.grid.N // 2 + 1) % 2 == 1 else D.grid.N // 2 + 2
    D_coarse = dc.build_discretized(tpath, GridSpec(T=D.grid.T, N=coarse_N), cap=ctx.disc_cap())

    rows = []
    for z in zs:
        J = ctx.jost_data(z)
        rhs = jost.callias_rhs(A_plus, A_minus, z)
        lhs_b = jost.callias_lhs_boundary(J, tpath, ctx.grid.T)
        lhs_q = jost.callias_lhs_quadrature(J, tpath)
        lhs_d = dc.resolvent_trace_diff(D, z)
        delta_d = lhs_d - dc.resolvent_trace_diff(D_coarse, z)
        res_b = abs(lhs_b - rhs)
        res_q = abs(lhs_q - lhs_b)
        res_d = abs(lhs_d - rhs)
        tol_b = CALLIAS_BOUNDARY_RTOL * (1.0 + abs(rhs))
        drift = jost.wronskian_drift(J)
        w1, w2 = jost.wronskian_identities(J)
        report.records.extend(
            [
                _record("callias", f"boundary-vs-rhs@z={z:g}", res_b <= tol_b,
                        residual=res_b, tolerance=tol_b, lhs=lhs_b, rhs=rhs),
                _record("callias", f"quadrature-vs-boundary@z={z:g}",
                        res_q <= CALLIAS_QUADRATURE_TOL,
                        residual=res_q, tolerance=CALLIAS_QUADRATURE_TOL, lhs=lhs_q),
                _record("callias", f"discrete-vs-rhs@z={z:g}", res_d <= CALLIAS_DISCRETE_TOL,
                        residual=res_d, tolerance=CALLIAS_DISCRETE_TOL,
                        lhs=lhs_d, refinement_delta=delta_d),
                _record("callias", f"wronskian-drift@z={z:g}", drift <= WRONSKIAN_TOL,
                        residual=drift, tolerance=WRONSKIAN_TOL),
                _record("callias", f"wronskian-identities@z={z:g}",
                        max(w1, w2) <= WRONSKIAN_TOL,
                        residual=max(w1, w2), tolerance=WRONSKIAN_TOL),
            ]
        )
        rows.append((z, lhs_b, lhs_q, lhs_d, rhs, res_b, res_q, res_d, delta_d))
    report.tables["callias"] = (
        ("z", "lhs_boundary", "lhs_quadrature", "lhs_discrete", "rhs",
         "resid_boundary", "resid_quadrature", "resid_discrete", "disc_refinement_delta"),
        rows,
    )
    if D.negative_artifact:
        report.records.append(
            _record("callias", "discretization-positivity", True, warning=True)
        )
    if ctx.config.get("dump_kernel_diagnostics", False):
        for z in zs:
            rows_d = jost.diagnostic_rows(ctx.jost_data(z), tpath)
            report.tables[f"kernel_z{z:g}"] = (
                ("t", "tr_R", "tr_R_tilde", "wronskian_drift"), rows_d
            )


def _exp_index(ctx: _Context, report: RunReport) -> None:
    gap = ctx.gap()
    threshold = ctx.threshold_fraction() * gap
    A_minus, A_plus = ctx.path.endpoints()
    xi = shift.spectral_shift(A_plus, A_minus)
    xi_zero = int(round(xi.value_at(0.0)))
    D = ctx.disc_pair("raw")
    n_H, n_Ht, margins = dc.kernel_dims(D, threshold)
    idx = n_H - n_Ht
    ker_D, ker_Dstar = dc.kernel_via_shooting(ctx.path)
    shoot = ker_D - ker_Dstar
    fl, events = spectral_flow(ctx.path, 0.0, ctx.flow_grid(ctx.path))
    agree = idx == shoot == xi_zero == fl
    report.records.append(
        _record("index", "four-route-agreement", agree, residual=0 if agree else 1,
                tolerance=0, fredholm_index=idx, shooting=shoot,
                shift_at_zero=xi_zero, spectral_flow=fl,
                kernel_margin_below=margins[0], kernel_margin_above=margins[1])
    )
    report.tables["events"] = (
        ("t_cross", "direction", "multiplicity"),
        [(e.t_cross, e.direction, e.multiplicity) for e in events],
    )
    report.tables["ssf"] = (("breakpoint", "value_left", "value_right"), xi.csv_rows())
    if D.negative_artifact:
        report.records.append(_record("index", "discretization-positivity", True, warning=True))


def _exp_ssf_gap(ctx: _Context, report: RunReport) -> None:
    gap = ctx.gap()
    lams = ctx.config.get("lambda_list") or [gap / 4.0, gap / 2.0, 3.0 * gap / 4.0]
    A_minus, A_plus = ctx.path.endpoints()
    eta = shift.spectral_shift(A_plus, A_minus)
    D = ctx.disc_pair("raw")
    for lam in lams:
        lam = float(lam)
        via_disc = dc.ssf_at(D, lam, gap)
        via_abel = shift.abel_transform(eta, lam)
        ok = via_disc == int(round(via_abel)) and abs(via_abel - round(via_abel)) < 1e-9
        report.records.append(
            _record("ssf-gap", f"counting-vs-abel@lam={lam:g}", ok,
                    residual=abs(via_disc - via_abel), tolerance=1e-9,
                    discrete=via_disc, abel=via_abel)
        )
    report.tables["gap_eigs"] = (
        ("index", "eig_H", "eig_H_tilde"), dc.gap_eigenvalue_rows(D, gap)
    )


def _exp_flow(ctx: _Context, report: RunReport) -> None:
    A_minus, A_plus = ctx.path.endpoints()
    xi = shift.spectral_shift(A_plus, A_minus)
    spec_all = np.concatenate(
        [hm.eigh(A_minus).eigenvalues, hm.eigh(A_plus).eigenvalues]
    )
    rng = stream_rng(int(ctx.config.get("seed", 0)), 1001)
    lo, hi = float(np.min(spec_all)) - 0.5, float(np.max(spec_all)) + 0.5
    lams: List[float] = []
    while len(lams) < 10:
        lam = rng.uniform(lo, hi)
        if np.min(np.abs(spec_all - lam)) > 1e-3:
            lams.append(lam)
    grid = ctx.flow_grid(ctx.path)
    rev = ctx.path.reverse()
    rgrid = ctx.flow_grid(rev)
    for lam in lams:
        fl, _ = spectral_flow(ctx.path, lam, grid)
        expected = int(round(xi.value_at(lam)))
        fl_rev, _ = spectral_flow(rev, lam, rgrid)
        ok = fl == expected and fl_rev == -fl
        report.records.append(
            _record("flow", f"flow-vs-shift@lam={lam:.6g}", ok,
                    residual=abs(fl - expected) + abs(fl_rev + fl), tolerance=0,
                    flow=fl, shift=expected, reversed_flow=fl_rev)
        )


def _exp_trace_formula(ctx: _Context, report: RunReport) -> None:
    A_minus, A_plus = ctx.path.endpoints()
    for fname, f in TRACE_TEST_FUNCTIONS:
        lhs, rhs, gap = shift.verify_trace_formula(A_plus, A_minus, f)
        report.records.append(
            _record("trace-formula", fname, gap <= TRACE_FORMULA_TOL,
                    residual=gap, tolerance=TRACE_FORMULA_TOL, lhs=lhs, rhs=rhs)
        )


def _converge_grid(n: float, h: float) -> GridSpec:
    T = float(n) + 3.0
    N = int(round(2.0 * T / h)) + 1
    if N % 2 == 0:
        N += 1
    return GridSpec(T=T, N=N)


def _exp_converge(ctx: _Context, report: RunReport) -> None:
    z0 = float(ctx.config["z_list"][0])
    h = ctx.grid.h
    A_minus, A_plus = ctx.path.endpoints()
    rhs = jost.callias_rhs(A_plus, A_minus, z0)

    rows = []
    residuals = {}
    for n in (2.0, 4.0, 8.0):
        tp = ctx.path.truncate(n)
        grid = _converge_grid(n, h)
        J = jost.solve_jost(tp, z0, grid)
        lhs = jost.callias_lhs_boundary(J, tp, grid.T)
        residuals[n] = abs(lhs - rhs)
        rows.append(("truncation", n, lhs, rhs, residuals[n]))
    ok = residuals[8.0] <= residuals[2.0]
    report.records.append(
        _record("converge", "truncation-residual-decreases", ok,
                residual=residuals[8.0], tolerance=residuals[2.0],
                resid_n2=residuals[2.0], resid_n4=residuals[4.0], resid_n8=residuals[8.0])
    )

    tp8 = ctx.path.truncate(8.0)
    grid8 = _converge_grid(8.0, h)
    J_ref = jost.solve_jost(tp8, z0, grid8)
    lhs_ref = jost.callias_lhs_boundary(J_ref, tp8, grid8.T)
    w, U = hm.eigh(ctx.path.A_minus)
    d = ctx.path.dim
    for k in range(1, d + 1):
        Uk = U[:, :k]
        P = Uk @ Uk.conj().T
        cp = tp8.compress(P)
        Jk = jost.solve_jost(cp, z0, grid8)
        lhs_k = jost.callias_lhs_boundary(Jk, cp, grid8.T)
        cm, cpl = cp.endpoints()
        rhs_k = jost.callias_rhs(cpl, cm, z0)
        rows.append(("compression", k, lhs_k, rhs_k, abs(lhs_k - rhs_k)))
        if k == d:
            res_full = max(abs(lhs_k - lhs_ref), abs(rhs_k - rhs))
            tol = COMPRESSION_FULL_RANK_TOL * (1.0 + abs(lhs_ref))
            report.records.append(
                _record("converge", "full-rank-compression-identity", res_full <= tol,
                        residual=res_full, tolerance=tol, lhs=lhs_k, lhs_ref=lhs_ref)
            )
    report.tables["converge"] = (
        ("kind", "parameter", "lhs_boundary", "rhs", "residual"), rows
    )


_EXPERIMENTS = {
    "callias": _exp_callias,
    "index": _exp_index,
    "ssf-gap": _exp_ssf_gap,
    "flow": _exp_flow,
    "trace-formula": _exp_trace_formula,
    "converge": _exp_converge,
}


def run_scenario(config: Dict[str, Any], threads: int = 1) -> RunReport:
    """Execute every experiment requested by the config."""
    validate_config(config)
    start = time.perf_counter()
    ctx = _Context(config, threads=threads)
    report = RunReport(name=config["name"], config=config)
    for name in config["experiments"]:
        try:
            _EXPERIMENTS[name](ctx, report)
        except SpecshiftError as exc:
            report.records.append(
                _record(name, "guard", False, error=f"{type(exc).__name__}: {exc}")
            )
    report.wall_time_s = time.perf_counter() - start
    return report
