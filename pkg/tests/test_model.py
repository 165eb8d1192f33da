import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from becwall import (
    CartesianProfile,
    CartesianState,
    DegenerateRadius,
    EpsilonZero,
    Frame,
    Mesh,
    ModelParams,
    SlowFastState,
    analytic_spectrum,
    cartesian_to_slowfast,
    hamiltonian_residual,
    linearize_slowfast,
    slowfast_rhs,
    slowfast_to_cartesian,
)
from becwall.errors import AngleOutOfRange
from becwall.model import equilibrium, rhs_cartesian

SQ = math.sqrt(0.5)
lams = st.floats(1.0, 5.0)
epss = st.floats(0.01, 0.5)


def constant_profile(u, v, eps=0.2, lam=1.0):
    mesh = Mesh.uniform_on(5.0, 101)
    return CartesianProfile(mesh, np.full(101, u), np.full(101, v), ModelParams.from_eps(lam, eps))


class TestParams:
    def test_eps_derived(self):
        p = ModelParams(1.0, 1.04)
        assert p.eps == pytest.approx(0.2, rel=1e-14)

    def test_from_eps_keeps_value(self):
        p = ModelParams.from_eps(2.0, 0.1)
        assert p.eps == 0.1
        assert p.coupling == 1.0 + 0.1**2

    @pytest.mark.parametrize("lam,coupling", [(0.5, 1.1), (1.0, 0.9), (float("nan"), 1.1)])
    def test_rejects(self, lam, coupling):
        with pytest.raises(ValueError):
            ModelParams(lam, coupling)

    def test_coupling_one_is_eps_zero(self):
        with pytest.raises(EpsilonZero):
            ModelParams(1.0, 1.0)
        with pytest.raises(EpsilonZero):
            ModelParams.from_eps(1.0, 0.0)

    def test_inconsistent_eps(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 1.04, 0.3)

    def test_frozen(self):
        p = ModelParams(1.0, 1.04)
        with pytest.raises(dataclasses.FrozenInstanceError):
            p.lam = 2.0


class TestRhs:
    @pytest.mark.parametrize("u,v", [(0.0, 1.0), (1.0, 0.0)])
    @pytest.mark.parametrize("frame", list(Frame))
    def test_equilibria(self, u, v, frame):
        out = rhs_cartesian(CartesianState(u, v, frame=frame), ModelParams(1.7, 1.3))
        assert out == (0.0, 0.0)

    def test_hand_value(self):
        out = rhs_cartesian(CartesianState(1.0, 1.0), ModelParams(1.0, 2.0))
        assert out == (2.0, 2.0)

    def test_frames_related_by_eps_squared(self):
        p = ModelParams.from_eps(2.0, 0.3)
        fast = rhs_cartesian(CartesianState(0.6, 0.5), p)
        slow = rhs_cartesian(CartesianState(0.6, 0.5, frame=Frame.SLOW_X), p)
        np.testing.assert_allclose(np.array(slow) * 0.09, fast, rtol=1e-13)


class TestHamiltonian:
    @pytest.mark.parametrize("u,v", [(0.0, 1.0), (1.0, 0.0)])
    @given(lam=lams, eps=epss)
    def test_zero_at_equilibria(self, u, v, lam, eps):
        p = ModelParams.from_eps(lam, eps)
        for frame in Frame:
            assert hamiltonian_residual(CartesianState(u, v, frame=frame), p) == 0.0

    def test_hand_values(self):
        assert hamiltonian_residual(CartesianState(1.0, 1.0), ModelParams(1.0, 2.0)) == pytest.approx(-0.75)
        assert hamiltonian_residual(CartesianState(SQ, SQ), ModelParams(1.0, 1.04)) == pytest.approx(-0.005)

    def test_slow_form_is_rescaled_fast_form(self):
        p = ModelParams.from_eps(1.5, 0.25)
        u, v, du, dv = 0.5, 0.7, 0.3, -0.2
        fast = hamiltonian_residual(CartesianState(u, v, du * 0.25, dv * 0.25), p)
        slow = hamiltonian_residual(CartesianState(u, v, du, dv, Frame.SLOW_X), p)
        assert slow == pytest.approx(fast / (0.25**2 / 2), rel=1e-12)


class TestCoordinates:
    def test_left_state(self):
        sf = cartesian_to_slowfast(constant_profile(0.0, 1.0))
        assert np.all(sf.w1 == 0.0)
        assert np.all(sf.phi1 == math.pi / 2)

    def test_unit_circle(self):
        sf = cartesian_to_slowfast(constant_profile(SQ, SQ))
        np.testing.assert_allclose(sf.phi1, math.pi / 4, rtol=1e-15)
        np.testing.assert_allclose(sf.w1, 0.0, atol=1e-13)

    def test_inside_disk(self):
        sf = cartesian_to_slowfast(constant_profile(0.48, 0.48))
        R = 0.48 * math.sqrt(2)
        assert R == pytest.approx(0.6788225, abs=1e-7)
        np.testing.assert_allclose(sf.w1, 8.029438, atol=1e-6)
        np.testing.assert_allclose(sf.phi2, 0.0, atol=1e-15)

    def test_degenerate_radius(self):
        with pytest.raises(DegenerateRadius):
            cartesian_to_slowfast(constant_profile(0.0, 0.0))

    def test_angle_out_of_range(self):
        with pytest.raises(AngleOutOfRange):
            cartesian_to_slowfast(constant_profile(-0.5, 0.5))

    def test_tiny_negative_is_clamped(self):
        sf = cartesian_to_slowfast(constant_profile(1.0, -1e-14))
        assert np.all(sf.phi1 == 0.0)

    @pytest.mark.parametrize(
        "state,expected",
        [
            ((0.0, 0.0, math.pi / 2, 0.0), (0.0, 1.0, 0.0, 0.0)),
            ((0.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)),
        ],
    )
    def test_equilibria_back(self, state, expected):
        c = slowfast_to_cartesian(SlowFastState(*state), ModelParams.from_eps(1.0, 0.2))
        np.testing.assert_allclose([c.u, c.v, c.du, c.dv], expected, atol=1e-16)
        assert c.frame is Frame.SLOW_X

    def test_chain_rule_hand_value(self):
        c = slowfast_to_cartesian(SlowFastState(0.25, 0.0, math.pi / 4, -0.5), ModelParams.from_eps(1.0, 0.2))
        assert c.u == pytest.approx(0.7000357, abs=1e-7)
        assert c.v == pytest.approx(0.7000357, abs=1e-7)
        assert c.du == pytest.approx(0.3500178, abs=1e-7)
        assert c.dv == pytest.approx(-0.3500178, abs=1e-7)

    def test_back_transform_degenerate(self):
        with pytest.raises(DegenerateRadius):
            slowfast_to_cartesian(SlowFastState(30.0, 0.0, 0.5, 0.0), ModelParams.from_eps(1.0, 0.2))

    def test_round_trip_on_wall(self, wall_l1):
        sf = cartesian_to_slowfast(wall_l1)
        back = slowfast_to_cartesian(sf.state(), wall_l1.params)
        np.testing.assert_allclose(back.u, wall_l1.u, rtol=0, atol=1e-12)
        np.testing.assert_allclose(back.v, wall_l1.v, rtol=0, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        R=st.floats(0.05, 1.0),
        phi=st.floats(0.0, math.pi / 2),
        eps=epss,
    )
    def test_round_trip_property(self, R, phi, eps):
        p = constant_profile(R * math.cos(phi), R * math.sin(phi), eps=eps)
        sf = cartesian_to_slowfast(p)
        back = slowfast_to_cartesian(sf.state(), p.params)
        np.testing.assert_allclose(back.u, p.u, rtol=0, atol=1e-12)
        np.testing.assert_allclose(back.v, p.v, rtol=0, atol=1e-12)


class TestSlowFastField:
    @given(lam=lams, eps=epss)
    def test_vanishes_at_equilibria(self, lam, eps):
        p = ModelParams.from_eps(lam, eps)
        for side in ("left", "right"):
            np.testing.assert_allclose(slowfast_rhs(equilibrium(side), p), 0.0, atol=1e-14)

    def test_hand_value(self):
        out = slowfast_rhs(SlowFastState(0.0, 0.0, math.pi / 4, 0.0), ModelParams.from_eps(1.0, 0.1))
        np.testing.assert_allclose(out, [0.0, -5.0, 0.0, 0.0], atol=1e-12)

    def test_eps_zero(self):
        # ModelParams refuses eps = 0, so force it past validation
        p = ModelParams.from_eps(1.0, 0.1)
        object.__setattr__(p, "eps", 0.0)
        with pytest.raises(EpsilonZero):
            slowfast_rhs(equilibrium("left"), p)
        with pytest.raises(EpsilonZero):
            linearize_slowfast(equilibrium("left"), p)

    def test_fast_rows_vanish_on_critical_manifold(self):
        from becwall import critical_manifold_point

        lam = 2.0
        phi1, phi2 = 0.6, -0.3
        w1, w2 = critical_manifold_point(phi1, phi2, lam)
        small = slowfast_rhs(SlowFastState(w1, w2, phi1, phi2), ModelParams.from_eps(lam, 1e-4))
        # rows scale like 1/eps times an O(eps^2) defect
        assert abs(small[1]) < 1e-3

    def test_jacobian_of_constant_field(self):
        J = linearize_slowfast(
            SlowFastState(0.1, 0.2, 0.3, 0.4), ModelParams.from_eps(1.0, 0.1), rhs=lambda s, p: np.ones(4)
        )
        assert np.all(J == 0.0)


class TestSpectrum:
    def test_left_lambda_two(self):
        spec = analytic_spectrum("left", ModelParams.from_eps(2.0, 0.1))
        np.testing.assert_allclose(spec.eigenvalues, [14.1421356, -14.1421356, 0.5, -0.5], atol=1e-7)
        assert spec.eigendirections[2] == (0.0, 0.0, 2.0, 1.0)

    def test_right_lambda_two(self):
        spec = analytic_spectrum("right", ModelParams.from_eps(2.0, 0.1))
        np.testing.assert_allclose(spec.eigenvalues, [7.0710678, -7.0710678, 1.0, -1.0], atol=1e-7)
        assert spec.eigendirections[0] == pytest.approx((2.0 / math.sqrt(2), 1.0, 0.0, 0.0))

    def test_lambda_one_sides_coincide(self):
        p = ModelParams.from_eps(1.0, 0.3)
        left = analytic_spectrum("left", p).eigenvalues
        right = analytic_spectrum("right", p).eigenvalues
        assert sorted(left) == sorted(right)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            analytic_spectrum("middle", ModelParams.from_eps(1.0, 0.3))

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    @pytest.mark.parametrize("eps", [0.05, 0.1, 0.25, 0.5])
    @pytest.mark.parametrize("side", ["left", "right"])
    def test_numerical_matches_analytic(self, lam, eps, side):
        p = ModelParams.from_eps(lam, eps)
        num = np.sort(np.linalg.eigvals(linearize_slowfast(equilibrium(side), p)).real)
        ana = np.sort(analytic_spectrum(side, p).eigenvalues)
        np.testing.assert_allclose(num, ana, rtol=1e-6)

    @pytest.mark.parametrize("side", ["left", "right"])
    def test_directions_are_eigenvectors(self, side):
        p = ModelParams.from_eps(2.0, 0.1)
        J = linearize_slowfast(equilibrium(side), p)
        spec = analytic_spectrum(side, p)
        for mu, d in zip(spec.eigenvalues, spec.eigendirections):
            d = np.array(d)
            np.testing.assert_allclose(J @ d, mu * d, rtol=1e-6, atol=1e-6 * abs(mu))

    @given(lam=lams, eps=epss)
    def test_pairs_sum_to_zero(self, lam, eps):
        p = ModelParams.from_eps(lam, eps)
        for side in ("left", "right"):
            assert abs(sum(analytic_spectrum(side, p).eigenvalues)) <= 1e-12


class TestMesh:
    def test_uniform(self):
        m = Mesh.uniform_on(24.0, 2401)
        assert m.h == pytest.approx(0.02)
        assert m.nodes[1200] == 0.0
        assert not m.nodes.flags.writeable

    @pytest.mark.parametrize(
        "nodes",
        [np.linspace(-1, 1, 51), np.linspace(-1, 1, 102), np.linspace(-1, 2, 101), -np.linspace(-1, 1, 101)],
    )
    def test_rejects(self, nodes):
        with pytest.raises(ValueError):
            Mesh(nodes)
