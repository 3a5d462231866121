import numpy as np
import pytest

from specshift.errors import OnEigenvalueError
from specshift.flow import eigenvalue_branches, spectral_flow
from specshift.paths import OperatorPath, TanhProfile
from specshift.shift import spectral_shift

from conftest import random_hermitian
from oracles import scalar_flow_oracle


def scalar_tanh():
    return OperatorPath([[-1.0]], [(TanhProfile(0.0, 1.0), [[2.0]])])


def default_grid(path, n=101):
    R = path.support_radius + 1.0
    return np.linspace(-R, R, n)


class TestBranches:
    def test_constant_rows_identical(self):
        p = OperatorPath(np.diag([1.0, -2.0]))
        br = eigenvalue_branches(p, np.linspace(-1, 1, 5))
        assert np.all(br == br[0])

    def test_scalar_tanh(self):
        br = eigenvalue_branches(scalar_tanh(), np.array([-6.0, 0.0, 6.0]))
        assert np.allclose(br.ravel(), [-1.0, 0.0, 1.0], atol=2e-5)

    def test_symmetric_pair(self):
        p = OperatorPath(np.diag([-1.0, 1.0]), [(TanhProfile(0, 1), np.diag([2.0, -2.0]))])
        br = eigenvalue_branches(p, np.linspace(-4, 4, 9))
        assert np.allclose(br[:, 0], -br[:, 1])

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            eigenvalue_branches(scalar_tanh(), np.array([1.0, 0.0]))


class TestSpectralFlow:
    def test_constant_invertible(self):
        p = OperatorPath(np.diag([-1.0, 1.0]))
        fl, events = spectral_flow(p, 0.0, np.linspace(-1, 1, 11))
        assert fl == 0 and events == []

    def test_scalar_tanh_single_crossing(self):
        p = scalar_tanh()
        fl, events = spectral_flow(p, 0.0, default_grid(p))
        assert fl == 1 and len(events) == 1
        e = events[0]
        assert e.direction == 1 and e.multiplicity == 1
        assert abs(e.t_cross) <= 1e-6 and e.bracket_width <= 1e-6

    def test_against_dense_sign_oracle(self):
        for level in (0.3, -0.55, 0.81):
            p = scalar_tanh()
            fl, events = spectral_flow(p, level, default_grid(p))
            fl_oracle, ev_oracle = scalar_flow_oracle(p, level)
            assert fl == fl_oracle
            assert len(events) == len(ev_oracle)
            for e, (t_ref, d_ref) in zip(events, ev_oracle):
                assert abs(e.t_cross - t_ref) < 1e-3 and e.direction == d_ref

    def test_separated_opposite_crossings(self):
        p = OperatorPath(np.diag([-1.0, 1.0]),
                         [(TanhProfile(-0.4, 1.0), np.diag([2.0, 0.0])),
                          (TanhProfile(0.4, 1.0), np.diag([0.0, -2.0]))])
        fl, events = spectral_flow(p, 0.0, default_grid(p, 201))
        assert fl == 0 and len(events) == 2
        assert {e.direction for e in events} == {-1, 1}

    def test_simultaneous_cancellation_is_net_invisible(self):
        # the two branches cross at exactly the same t; counting jumps see
        # no net change, which is the net-crossing semantics
        p = OperatorPath(np.diag([-1.0, 1.0]), [(TanhProfile(0, 1), np.diag([2.0, -2.0]))])
        fl, events = spectral_flow(p, 0.0, default_grid(p, 201))
        assert fl == 0 and events == []

    def test_multiplicity_two(self):
        p = OperatorPath(np.diag([-1.0, -1.5]), [(TanhProfile(0.3, 0.8), np.diag([2.0, 3.0]))])
        fl, events = spectral_flow(p, 0.0, default_grid(p, 201))
        assert fl == 2
        assert sum(e.multiplicity for e in events) == 2

    def test_level_on_endpoint_spectrum_rejected(self):
        p = scalar_tanh()
        with pytest.raises(OnEigenvalueError):
            spectral_flow(p, 1.0, np.linspace(-30, 30, 41))

    def test_grid_must_cover_support(self):
        p = scalar_tanh()
        with pytest.raises(ValueError):
            spectral_flow(p, 0.0, np.linspace(-2, 2, 11))


class TestFlowEqualsShift:
    def test_random_paths(self, rng):
        for trial in range(5):
            d = int(rng.integers(1, 4))
            A_minus = random_hermitian(rng, d)
            C = random_hermitian(rng, d)
            p = OperatorPath(A_minus, [(TanhProfile(float(rng.uniform(-1, 1)), 1.0), C)])
            Am, Ap = p.endpoints()
            xi = spectral_shift(Ap, Am)
            spec = np.concatenate([np.linalg.eigvalsh(Am), np.linalg.eigvalsh(Ap)])
            grid = default_grid(p, 201)
            for _ in range(10):
                lam = float(rng.uniform(spec.min() - 0.5, spec.max() + 0.5))
                if np.min(np.abs(spec - lam)) < 1e-3:
                    continue
                fl, _ = spectral_flow(p, lam, grid)
                assert fl == int(round(xi.value_at(lam)))

    def test_grid_refinement_stable(self):
        p = OperatorPath(np.diag([-1.0, -1.5]), [(TanhProfile(0.3, 0.8), np.diag([2.0, 3.0]))])
        flows = {n: spectral_flow(p, 0.0, default_grid(p, n))[0] for n in (51, 101, 201, 401)}
        assert len(set(flows.values())) == 1

    def test_reversal_antisymmetry(self, rng):
        for _ in range(3):
            d = 2
            p = OperatorPath(random_hermitian(rng, d),
                             [(TanhProfile(0.2, 0.9), random_hermitian(rng, d))])
            spec = np.concatenate([np.linalg.eigvalsh(M) for M in p.endpoints()])
            lam = float(spec.mean() + 0.37)
            if np.min(np.abs(spec - lam)) < 1e-3:
                continue
            fl, _ = spectral_flow(p, lam, default_grid(p, 201))
            rev = p.reverse()
            fl_rev, _ = spectral_flow(rev, lam, default_grid(rev, 201))
            assert fl_rev == -fl
