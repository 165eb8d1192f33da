import json
import math

import numpy as np
import pytest

from becwall import (
    CartesianProfile,
    Mesh,
    ModelParams,
    NoConvergence,
    SolverConfig,
    composite_guess,
    rate_study,
    validate_profile,
    weighted_deviation,
)
from becwall.bvp import DEFAULT_LADDER
from becwall.validation import REPORT_KEYS, _decay_weight, energy_of_profile, sigma_limit

from conftest import reduced, solved

# frozen from the first oracle runs (default mesh, ladder eps)
MANIFOLD_C = 0.1  # manifold_distance / eps was 0.089 at lam = 1, eps = 0.2
SIGMA_K = {1.0: 0.075, 2.0: 0.12}  # max |sigma_ratio - limit| / eps over the ladder: 0.067, 0.108
D_PHI1_HALVING_L1 = 0.263  # D_phi1(0.1) / D_phi1(0.2) at lam = 1


@pytest.fixture(scope="module")
def constant_fixture():
    mesh = Mesh.uniform_on(5.0, 101)
    return CartesianProfile(mesh, np.zeros(101), np.ones(101), ModelParams.from_eps(1.0, 0.2))


class TestReport:
    def test_constant_fixture(self, constant_fixture):
        r = validate_profile(constant_fixture)
        assert r.hamiltonian_sup == 0.0
        assert r.disk_bound is False
        assert r.passed is False
        assert r.energy == 0.0

    def test_energy_of_constant(self, constant_fixture):
        assert energy_of_profile(constant_fixture) == 0.0

    def test_never_raises_on_garbage(self, constant_fixture):
        bad = CartesianProfile(constant_fixture.mesh, -np.ones(101), np.zeros(101), constant_fixture.params)
        r = validate_profile(bad)
        assert not r.passed
        assert r.weighted_deviations is None

    @pytest.mark.parametrize("lam,eps", [(1.0, 0.4), (1.0, 0.2), (1.0, 0.05), (2.0, 0.1), (2.0, 0.4), (4.0, 0.05)])
    def test_walls_pass(self, lam, eps):
        r = validate_profile(solved(lam, eps))
        assert r.passed
        assert r.monotone_u and r.monotone_v and r.disk_bound and r.angle_decreasing and r.phi2_negative

    def test_manifold_distance(self, wall_l1):
        r = validate_profile(wall_l1)
        assert r.manifold_distance <= MANIFOLD_C * 0.2

    def test_symmetry_defect(self, wall_l1):
        r = validate_profile(wall_l1)
        assert r.symmetry_defect <= 10 * wall_l1.mesh.h**2

    def test_no_symmetry_for_lambda_two(self, wall_l2):
        assert validate_profile(wall_l2).symmetry_defect is None

    def test_keys_and_json(self, wall_l1):
        d = validate_profile(wall_l1).to_dict()
        assert tuple(d) == REPORT_KEYS
        assert set(d["weighted_deviations"]) == {"phi1", "phi2", "w1"}
        json.dumps(d)

    def test_pure(self, wall_l1):
        u0 = wall_l1.u.copy()
        a, b = validate_profile(wall_l1), validate_profile(wall_l1)
        assert a == b
        assert np.array_equal(u0, wall_l1.u)

    @pytest.mark.parametrize("lam,eps", [(1.0, 0.2), (2.0, 0.1)])
    def test_hamiltonian_refinement(self, lam, eps):
        coarse = validate_profile(solved(lam, eps, 2401)).hamiltonian_sup
        fine = validate_profile(solved(lam, eps, 4801)).hamiltonian_sup
        assert 3.0 <= coarse / fine <= 5.0


class TestEnergy:
    def test_limits(self):
        assert sigma_limit(1.0) == 0.5
        assert sigma_limit(2.0) == pytest.approx(7 / 9, rel=1e-15)

    @pytest.mark.parametrize("lam,expected", [(1.0, 0.05), (2.0, 0.0778)])
    def test_energy_near_leading_term(self, lam, expected):
        assert energy_of_profile(solved(lam, 0.1)) == pytest.approx(expected, rel=0.1)

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    def test_sigma_deviation_monotone_and_bounded(self, lam):
        dev = [validate_profile(solved(lam, e)).sigma_ratio - sigma_limit(lam) for e in DEFAULT_LADDER]
        d = np.diff(dev)
        assert np.all(d > 0) or np.all(d < 0)
        assert all(abs(x) <= SIGMA_K[lam] * e for x, e in zip(dev, DEFAULT_LADDER))


class TestWeightedDeviation:
    def test_weight_at_origin(self):
        assert _decay_weight(np.array([0.0]), 3.0)[0] == 1.0
        assert _decay_weight(np.array([0.0]), 3.0, 2.0)[0] == 1.0

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    def test_self_comparison(self, lam):
        r = reduced(lam)
        lifted = composite_guess(r, ModelParams.from_eps(lam, 0.01))
        d = weighted_deviation(lifted, r)
        h = lifted.mesh.h
        assert d["phi1"] <= 1e-14
        # phi2 and w1 carry the finite-difference error of the profile
        assert d["phi2"] <= 10 * h**2 and d["w1"] <= 10 * h**2

    def test_lambda_mismatch(self, wall_l1):
        with pytest.raises(ValueError):
            weighted_deviation(wall_l1, reduced(2.0))

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    def test_phi_components_comparable(self, lam):
        d = validate_profile(solved(lam, 0.1)).weighted_deviations
        assert 0.1 <= d["phi1"] / d["phi2"] <= 10

    def test_halving_ratio_regression(self):
        # the deviation is O(eps^2) here, so halving eps quarters it
        d2 = validate_profile(solved(1.0, 0.2)).weighted_deviations["phi1"]
        d1 = validate_profile(solved(1.0, 0.1)).weighted_deviations["phi1"]
        assert d1 / d2 == pytest.approx(D_PHI1_HALVING_L1, abs=0.01)


class TestRateStudy:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            rate_study(1.0, [0.1, 0.2])
        with pytest.raises(ValueError):
            rate_study(1.0, [0.1])

    def test_study(self):
        study = rate_study(2.0, [0.2, 0.1])
        assert study.sigma_limit == pytest.approx(7 / 9)
        assert all(math.isfinite(s) for s in study.slopes.values())
        assert len(study.halving_ratios["phi1"]) == 1
        d = study.to_dict()
        assert "profiles" not in d
        json.dumps(d)

    def test_parallel_matches_serial(self):
        a = rate_study(1.0, [0.3, 0.15], workers=1)
        b = rate_study(1.0, [0.3, 0.15], workers=2)
        assert a.to_dict() == b.to_dict()

    def test_solver_failure_names_eps(self):
        cfg = SolverConfig(max_iter=0, continuation_steps=())
        with pytest.raises(NoConvergence, match="eps = 0.3"):
            rate_study(1.0, [0.3, 0.15], cfg)
