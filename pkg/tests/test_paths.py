import numpy as np
import pytest
from scipy.integrate import quad

from specshift import hermitian as hm
from specshift.errors import NotInvertibleAtInfinityError
from specshift.paths import (
    OperatorPath,
    RampProfile,
    SmoothstepProfile,
    TanhProfile,
    TruncatedProfile,
    make_profile,
)

from conftest import random_hermitian


def scalar_tanh_path():
    return OperatorPath([[-1.0]], [(TanhProfile(0.0, 1.0), [[2.0]])])


def random_path(rng, d, nterms=2):
    terms = []
    kinds = [TanhProfile, SmoothstepProfile, RampProfile]
    for k in range(nterms):
        prof = kinds[k % 3](float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.5, 1.5)))
        terms.append((prof, random_hermitian(rng, d)))
    return OperatorPath(random_hermitian(rng, d), terms)


class TestProfiles:
    @pytest.mark.parametrize("kind", ["tanh-sigmoid", "smoothstep-compact", "piecewise-linear-ramp"])
    def test_limits_and_monotone(self, kind):
        p = make_profile(kind, 0.3, 0.9)
        ts = np.linspace(-40, 40, 4001)
        v = p.value(ts)
        assert abs(v[0]) < 1e-14 and abs(v[-1] - 1.0) < 1e-14
        assert np.all(np.diff(v) >= -1e-15)

    @pytest.mark.parametrize("kind", ["tanh-sigmoid", "smoothstep-compact", "piecewise-linear-ramp"])
    def test_derivative_integrates_to_one(self, kind):
        p = make_profile(kind, -0.4, 1.1)
        val, _ = quad(lambda t: p.deriv(t), -60, 60, limit=400,
                      points=[p.center - p.width, p.center, p.center + p.width])
        assert abs(val - 1.0) < 1e-9

    def test_compact_support_exact(self):
        for p in (SmoothstepProfile(0.5, 1.0), RampProfile(0.5, 1.0)):
            lo, hi = p.exact_support
            assert p.deriv(lo - 1e-12) == 0.0
            assert p.deriv(hi + 1e-12) == 0.0
            assert p.value(lo - 0.5) == 0.0 and p.value(hi + 0.5) == 1.0

    def test_ramp_one_sided_derivative(self):
        p = RampProfile(0.0, 1.0)
        assert p.deriv(-1.0, side=1) == 0.5
        assert p.deriv(-1.0, side=-1) == 0.0
        assert p.deriv(1.0, side=1) == 0.0
        assert p.deriv(1.0, side=-1) == 0.5

    def test_reflect_identity(self):
        for p in (TanhProfile(0.7, 1.2), SmoothstepProfile(-0.3, 0.8),
                  RampProfile(0.2, 0.6), TruncatedProfile(TanhProfile(0.4, 1.0), 5.0)):
            r = p.reflect()
            ts = np.linspace(-9, 9, 801)
            assert np.allclose(r.value(ts), 1.0 - p.value(-ts), atol=1e-14)


class TestEvaluation:
    def test_no_terms(self):
        A = np.diag([2.0, -1.0])
        p = OperatorPath(A)
        assert np.array_equal(p.value(3.7), A)
        assert hm.max_abs(p.derivative(0.0)) == 0.0

    def test_scalar_tanh_values(self):
        p = scalar_tanh_path()
        assert abs(p.value(0.0)[0, 0]) < 1e-15
        assert abs(p.value(60.0)[0, 0] - 1.0) < 1e-14
        assert abs(p.derivative(0.0)[0, 0] - 1.0) < 1e-15

    def test_compact_derivative_zero_outside(self):
        p = OperatorPath([[0.0]], [(SmoothstepProfile(0.5, 1.0), [[3.0]])])
        assert hm.max_abs(p.derivative(0.5 + 2.0)) == 0.0

    def test_endpoints(self):
        p = scalar_tanh_path()
        Am, Ap = p.endpoints()
        assert Am[0, 0] == -1.0 and Ap[0, 0] == 1.0
        p2 = OperatorPath(-np.eye(2), [(TanhProfile(0, 1), np.diag([2.0, 0.0])),
                                       (TanhProfile(0, 1), np.diag([0.0, 2.0]))])
        Am2, Ap2 = p2.endpoints()
        assert np.allclose(Am2, -np.eye(2)) and np.allclose(Ap2, np.eye(2))

    def test_potentials(self):
        const = OperatorPath(np.diag([1.5, -0.5]))
        Q, Qt = const.potentials(0.3)
        assert np.allclose(Q, np.diag([2.25, 0.25])) and np.allclose(Qt, Q)
        p = scalar_tanh_path()
        Q0, Qt0 = p.potentials(0.0)
        assert abs(Q0[0, 0] + 1.0) < 1e-14 and abs(Qt0[0, 0] - 1.0) < 1e-14

    def test_potential_difference_identity(self, rng):
        p = random_path(rng, 3)
        for t in rng.uniform(-4, 4, size=20):
            Q, Qt = p.potentials(float(t))
            assert hm.max_abs(Qt - Q - 2.0 * p.derivative(float(t))) <= 1e-13

    def test_hermiticity_everywhere(self, rng):
        p = random_path(rng, 3)
        for t in rng.uniform(-5, 5, size=100):
            for M in (p.value(float(t)), p.derivative(float(t)), *p.potentials(float(t))):
                assert hm.max_abs(M - M.conj().T) <= 1e-12 * max(1.0, hm.max_abs(M))

    def test_derivative_matches_finite_differences(self, rng):
        p = random_path(rng, 2, nterms=1)  # tanh term: smooth
        errs = {}
        for h in (1e-3, 1e-4):
            worst = 0.0
            for t in rng.uniform(-2, 2, size=25):
                fd = (p.value(float(t) + h) - p.value(float(t) - h)) / (2 * h)
                worst = max(worst, hm.max_abs(fd - p.derivative(float(t))))
            errs[h] = worst
        order = np.log10(errs[1e-3] / errs[1e-4])
        assert order >= 1.9


class TestTotalVariation:
    def test_no_terms(self):
        assert OperatorPath(np.eye(2)).total_variation() == 0.0

    def test_single_term(self, rng):
        C = random_hermitian(rng, 3)
        p = OperatorPath(np.zeros((3, 3)), [(TanhProfile(0.2, 0.9), C)])
        assert abs(p.total_variation() - hm.trace_norm(C)) <= 1e-9

    def test_disjoint_supports_additive(self, rng):
        C1, C2 = random_hermitian(rng, 2), random_hermitian(rng, 2)
        p = OperatorPath(np.zeros((2, 2)), [(RampProfile(-4.0, 1.0), C1),
                                            (SmoothstepProfile(4.0, 1.0), C2)])
        expected = hm.trace_norm(C1) + hm.trace_norm(C2)
        assert abs(p.total_variation() - expected) <= 1e-9

    def test_lower_bound_by_endpoint_gap(self, rng):
        p = random_path(rng, 2)
        Am, Ap = p.endpoints()
        assert p.total_variation() >= hm.trace_norm(Ap - Am) - 1e-9

    def test_against_quad_oracle(self, rng):
        p = random_path(rng, 2)
        R = p.support_radius
        pts = sorted({-R, R, *p.kinks(), *(pr.center for pr, _ in p.terms)})
        oracle, _ = quad(lambda t: hm.trace_norm(p.derivative(t)), -R, R,
                         points=pts, limit=500)
        assert abs(p.total_variation() - oracle) <= 1e-8

    def test_truncation_monotone_convergence(self):
        p = OperatorPath([[-1.0]], [(TanhProfile(0.0, 1.5), [[2.0]])])
        tv = p.total_variation()
        devs = [abs(p.truncate(n).total_variation() - tv) for n in (2.0, 4.0, 8.0)]
        assert devs[0] >= devs[1] >= devs[2]
        assert devs[2] < 1e-6


class TestTruncate:
    def test_already_compact_unchanged(self):
        p = OperatorPath([[0.0]], [(RampProfile(0.0, 1.0), [[1.0]])])
        tr = p.truncate(4.0)
        ts = np.linspace(-8, 8, 1601)
        assert np.array_equal(tr.values(ts), p.values(ts))

    def test_sup_deviation_bound(self):
        p = scalar_tanh_path()
        tr = p.truncate(6.0)
        ts = np.linspace(-12, 12, 9601)
        dev = np.max(np.abs(tr.values(ts) - p.values(ts)))
        assert dev <= (1.0 - np.tanh(6.0)) + 1e-15

    def test_endpoints_preserved(self, rng):
        p = random_path(rng, 2)
        tr = p.truncate(3.0)
        for a, b in zip(p.endpoints(), tr.endpoints()):
            assert hm.max_abs(a - b) <= 1e-14

    def test_exact_compactness(self):
        tr = scalar_tanh_path().truncate(6.0)
        assert tr.exactly_compact
        assert tr.support_radius == 7.0
        assert hm.max_abs(tr.derivative(7.0 + 1e-9)) == 0.0
        assert hm.max_abs(tr.derivative(-30.0)) == 0.0

    def test_values_match_inside(self):
        p = scalar_tanh_path()
        tr = p.truncate(5.0)
        ts = np.linspace(-5, 5, 301)
        assert np.allclose(tr.values(ts), p.values(ts), atol=1e-15)


class TestCompress:
    def test_identity_projection(self, rng):
        p = random_path(rng, 3)
        cp = p.compress(np.eye(3))
        ts = np.linspace(-3, 3, 50)
        assert np.array_equal(cp.values(ts), p.values(ts))

    def test_zero_projection(self, rng):
        p = random_path(rng, 3)
        cp = p.compress(np.zeros((3, 3)))
        assert hm.max_abs(cp.value(0.0)) == 0.0

    def test_block_projection(self, rng):
        p = random_path(rng, 2)
        P = np.diag([1.0, 0.0])
        cp = p.compress(P)
        for t in (-1.0, 0.0, 2.0):
            full = p.value(t)
            comp = cp.value(t)
            assert comp[0, 0] == full[0, 0]
            assert comp[0, 1] == 0.0 and comp[1, 1] == 0.0

    def test_rejects_non_projection(self, rng):
        p = random_path(rng, 2)
        with pytest.raises(ValueError):
            p.compress(0.5 * np.eye(2))

    def test_endpoints_commute_with_compression(self, rng):
        p = random_path(rng, 3)
        u = hm.eigh(random_hermitian(rng, 3)).vectors[:, :2]
        P = u @ u.conj().T
        cp = p.compress(P)
        for a, b in zip(cp.endpoints(), p.endpoints()):
            assert hm.max_abs(a - P @ b @ P) <= 1e-12


class TestTailGapAndReverse:
    def test_scalar(self):
        assert scalar_tanh_path().tail_gap() == 1.0

    def test_diagonal(self):
        p = OperatorPath(np.diag([-2.0, -1.0]),
                         [(TanhProfile(0, 1), np.diag([3.0, 4.0]))])
        assert p.tail_gap() == 1.0

    def test_singular_endpoint_rejected(self):
        p = OperatorPath([[-1.0]], [(TanhProfile(0, 1), [[1.0]])])  # A+ = 0
        with pytest.raises(NotInvertibleAtInfinityError):
            p.tail_gap()

    def test_reverse_pointwise(self, rng):
        p = random_path(rng, 2)
        rev = p.reverse()
        for t in rng.uniform(-6, 6, size=25):
            assert hm.max_abs(rev.value(float(t)) - p.value(-float(t))) <= 1e-12
