import numpy as np
import pytest

from specshift.errors import AmbiguousAtBreakpointError
from specshift.shift import StepFunction, abel_transform, spectral_shift, verify_trace_formula

from conftest import random_hermitian
from oracles import abel_quad_oracle


def random_step(rng, max_breaks=6, integer=False):
    m = int(rng.integers(0, max_breaks + 1))
    bks = np.sort(rng.uniform(-2.5, 2.5, size=m))
    if bks.size > 1:
        bks = bks[np.concatenate([[True], np.diff(bks) > 1e-6])]
    vals = [0.0]
    for _ in range(bks.size):
        step = int(rng.integers(-3, 4)) if integer else float(rng.uniform(-2, 2))
        while step == 0:
            step = int(rng.integers(-3, 4)) if integer else 1.0
        vals.append(vals[-1] + step)
    return StepFunction(bks, np.array(vals, dtype=float))


class TestStepFunction:
    def test_canonical_rejects_equal_adjacent(self):
        with pytest.raises(ValueError):
            StepFunction(np.array([0.0]), np.array([1.0, 1.0]))

    def test_from_jumps_cancels(self):
        sf = StepFunction.from_jumps([0.0, 0.0 + 1e-14], [1.0, -1.0])
        assert sf.breakpoints.size == 0
        assert sf.values.tolist() == [0.0]

    def test_from_jumps_clusters(self):
        sf = StepFunction.from_jumps([1.0, 1.0 + 1e-13, 2.0], [1.0, 1.0, -2.0])
        assert np.allclose(sf.breakpoints, [1.0, 2.0])
        assert sf.values.tolist() == [0.0, 2.0, 0.0]

    def test_value_at(self):
        sf = StepFunction(np.array([-1.0, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert sf.value_at(0.0) == 1.0
        assert sf.value_at(5.0) == 0.0
        with pytest.raises(AmbiguousAtBreakpointError):
            sf.value_at(1.0)
        with pytest.raises(AmbiguousAtBreakpointError):
            sf.value_at(1.0 + 1e-13)

    def test_zero_function(self):
        sf = StepFunction(np.array([]), np.array([0.0]))
        assert sf.value_at(3.0) == 0.0
        assert sf.integral() == 0.0

    def test_csv_rows(self):
        sf = StepFunction(np.array([-1.0, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert sf.csv_rows() == [(-1.0, 0.0, 1.0), (1.0, 1.0, 0.0)]


class TestSpectralShift:
    def test_identical_pair(self, rng):
        M = random_hermitian(rng, 3)
        xi = spectral_shift(M, M)
        assert xi.breakpoints.size == 0 and xi.values.tolist() == [0.0]

    def test_scalar_pair(self):
        xi = spectral_shift([[1.0]], [[-1.0]])
        assert np.allclose(xi.breakpoints, [-1.0, 1.0])
        assert xi.values.tolist() == [0.0, 1.0, 0.0]

    def test_diagonal_pair(self):
        xi = spectral_shift(np.diag([1.0, 2.0]), np.diag([-2.0, -1.0]))
        assert np.allclose(xi.breakpoints, [-2.0, -1.0, 1.0, 2.0])
        assert xi.values.tolist() == [0.0, 1.0, 2.0, 1.0, 0.0]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            spectral_shift(np.eye(2), np.eye(3))

    def test_compact_support_and_integers(self, rng):
        for _ in range(10):
            X, Y = random_hermitian(rng, 4), random_hermitian(rng, 4)
            xi = spectral_shift(X, Y)
            assert xi.values[0] == 0.0 and xi.values[-1] == 0.0
            assert np.allclose(xi.values, np.round(xi.values))

    def test_antisymmetry(self, rng):
        X, Y = random_hermitian(rng, 3), random_hermitian(rng, 3)
        xi = spectral_shift(X, Y)
        neg = spectral_shift(Y, X)
        assert np.array_equal(xi.breakpoints, neg.breakpoints)
        assert np.array_equal(xi.values, -neg.values)

    def test_chain_rule(self, rng):
        for _ in range(5):
            X, Y, Z = (random_hermitian(rng, 3) for _ in range(3))
            xi_xz = spectral_shift(X, Z)
            xi_xy = spectral_shift(X, Y)
            xi_yz = spectral_shift(Y, Z)
            pts = np.unique(
                np.concatenate([xi_xz.breakpoints, xi_xy.breakpoints, xi_yz.breakpoints])
            )
            mids = 0.5 * (pts[1:] + pts[:-1])
            mids = mids[np.diff(pts) > 1e-9]
            samples = np.concatenate([[pts[0] - 1.0], mids, [pts[-1] + 1.0]])
            for lam in samples:
                assert xi_xz.value_at(lam) == xi_xy.value_at(lam) + xi_yz.value_at(lam)

    def test_first_moment(self, rng):
        for _ in range(10):
            X, Y = random_hermitian(rng, 4), random_hermitian(rng, 4)
            xi = spectral_shift(X, Y)
            tr = float(np.real(np.trace(X - Y)))
            assert abs(xi.integral() - tr) <= 1e-10 * (1.0 + abs(tr))


class TestTraceFormula:
    def test_identical_pair(self, rng):
        M = random_hermitian(rng, 3)
        lhs, rhs, gap = verify_trace_formula(M, M, lambda s: s**2)
        assert lhs == rhs == gap == 0.0

    def test_scalar_resolvent(self):
        lhs, rhs, gap = verify_trace_formula([[1.0]], [[-1.0]], lambda s: 1.0 / (s + 2.0))
        assert abs(lhs + 2.0 / 3.0) < 1e-14
        assert gap < 1e-14

    def test_scalar_square_odd_symmetry(self):
        lhs, rhs, gap = verify_trace_formula([[1.0]], [[-1.0]], lambda s: s * s)
        assert abs(lhs) < 1e-14 and abs(rhs) < 1e-14

    def test_function_battery(self, rng):
        fns = [lambda s: s**2, lambda s: s**3, lambda s: 1.0 / (s + 4.0), np.arctan]
        for _ in range(10):
            scale = rng.uniform(0.5, 1.5)
            X = random_hermitian(rng, 4, scale)
            Y = random_hermitian(rng, 4, scale)
            for f in fns:
                _, _, gap = verify_trace_formula(X, Y, f)
                assert gap <= 1e-10


class TestAbelTransform:
    def test_zero(self):
        eta = StepFunction(np.array([]), np.array([0.0]))
        assert abel_transform(eta, 1.0) == 0.0

    def test_constant_on_window(self):
        # all breakpoints outside (-sqrt(lam), sqrt(lam)): the kernel has
        # unit mass, so the transform returns the central value exactly
        eta = StepFunction(np.array([-3.0, 3.0]), np.array([0.0, 2.0, 0.0]))
        assert abs(abel_transform(eta, 4.0) - 2.0) < 1e-14

    def test_arcsin_example(self):
        eta = StepFunction(np.array([-1.0, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert abs(abel_transform(eta, 4.0) - 1.0 / 3.0) < 1e-14

    def test_rejects_nonpositive_lam(self):
        eta = StepFunction(np.array([]), np.array([0.0]))
        for lam in (0.0, -1.0):
            with pytest.raises(ValueError):
                abel_transform(eta, lam)

    def test_breakpoint_at_window_edge(self):
        eta = StepFunction(np.array([-2.0, 2.0]), np.array([0.0, 1.0, 0.0]))
        assert abs(abel_transform(eta, 4.0) - 1.0) < 1e-14

    def test_against_quadrature_oracle(self, rng):
        for _ in range(100):
            eta = random_step(rng)
            lam = float(rng.uniform(0.05, 9.0))
            closed = abel_transform(eta, lam)
            brute = abel_quad_oracle(eta.breakpoints, eta.values, lam)
            assert abs(closed - brute) <= 1e-9

    def test_monotone_in_eta(self, rng):
        for _ in range(20):
            eta1 = random_step(rng)
            # eta2 = eta1 plus a positive square bump on a random interval
            p, q = np.sort(rng.uniform(-3.0, 3.0, size=2))
            height = float(rng.uniform(0.1, 2.0))
            points = list(eta1.breakpoints) + [p, q]
            deltas = list(np.diff(eta1.values)) + [height, -height]
            eta2 = StepFunction.from_jumps(points, deltas)
            lam = float(rng.uniform(0.1, 8.0))
            assert abel_transform(eta2, lam) >= abel_transform(eta1, lam) - 1e-12
