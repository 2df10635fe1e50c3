"""Tests for generating curves, invariant surfaces, closed forms and special surfaces"""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from immersion_oracle import jet_finite_difference, normal_residuals
from invariant_families import (
    Family,
    GeneratingCurve,
    InvariantSurface,
    closed_form_N_H,
    closed_form_arrays,
    curve_from_phi,
    jet_analytic,
    oracle_forms,
    random_curve,
    sigma_theta0,
    sigma_x0,
    sigma_y0,
    speed,
    stack_jet,
    straight_line,
)
from sl2r_core import DomainError, RegularityError
from translator_lab import FIBER_RANGES


def _fiber(family, u):
    lo, hi = FIBER_RANGES[family]
    return lo + (hi - lo) * u


class TestClosedFormsAgainstOracle:
    @pytest.mark.parametrize("family", list(Family))
    @hyp_settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000), s=st.floats(min_value=-1.0, max_value=1.0),
           u=st.floats(min_value=0.0, max_value=1.0))
    def test_mean_curvature_and_normal(self, family, seed, s, u):
        surface = InvariantSurface(family, random_curve(family, np.random.default_rng(seed)))
        t = _fiber(family, u)
        normal, h = closed_form_N_H(surface, s, t)
        forms = oracle_forms(surface, s, t)
        assert forms.mean_curvature == pytest.approx(h, abs=1e-6 * max(1.0, abs(h)))
        assert forms.unit_normal.as_array() == pytest.approx(normal.as_array(), abs=1e-8)

    @pytest.mark.parametrize("family", list(Family))
    def test_orientation_flip(self, family, rng):
        surface = InvariantSurface(family, random_curve(family, rng))
        t = _fiber(family, 0.3)
        n, h = closed_form_N_H(surface, 0.2, t)
        n_flip, h_flip = closed_form_N_H(surface.flipped(), 0.2, t)
        assert h_flip == pytest.approx(-h)
        assert n_flip.as_array() == pytest.approx(-n.as_array())
        assert oracle_forms(surface.flipped(), 0.2, t).mean_curvature == pytest.approx(-h, abs=1e-8)

    @pytest.mark.parametrize("family", list(Family))
    def test_finite_difference_jets(self, family, rng):
        surface = InvariantSurface(family, random_curve(family, rng))
        t = _fiber(family, 0.6)
        _, h = closed_form_N_H(surface, -0.4, t)
        assert oracle_forms(surface, -0.4, t, jets="fd").mean_curvature == pytest.approx(h, abs=1e-4 * max(1.0, abs(h)))

    @pytest.mark.parametrize("family", list(Family))
    def test_normal_conditions(self, family, rng):
        surface = InvariantSurface(family, random_curve(family, rng))
        t = _fiber(family, 0.5)
        assert normal_residuals(jet_analytic(surface, 0.1, t), oracle_forms(surface, 0.1, t)) < 1e-10

    @pytest.mark.parametrize("family", list(Family))
    def test_reparametrization_invariance(self, family, rng):
        curve = random_curve(family, rng)
        t = _fiber(family, 0.5)
        _, h = closed_form_N_H(InvariantSurface(family, curve), 0.6, t)
        _, h_fast = closed_form_N_H(InvariantSurface(family, curve.reparametrized(3.0)), 0.2, t)
        assert h_fast == pytest.approx(h, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("family", list(Family))
    def test_oracle_mean_curvature_under_doubled_speed(self, family, rng):
        curve = random_curve(family, rng)
        t = _fiber(family, 0.4)
        h = oracle_forms(InvariantSurface(family, curve), 0.6, t).mean_curvature
        h_fast = oracle_forms(InvariantSurface(family, curve.reparametrized(2.0)), 0.3, t).mean_curvature
        assert h_fast == pytest.approx(h, rel=1e-10, abs=1e-12)

    def test_n_family_independent_of_fiber(self, rng):
        surface = InvariantSurface(Family.N, random_curve(Family.N, rng))
        normal, h = closed_form_arrays(surface, 0.3, np.linspace(-3.0, 3.0, 7))
        assert normal.shape == (3, 7)
        assert np.ptp(h) == 0.0

    def test_vectorized_matches_pointwise(self, rng):
        surface = InvariantSurface(Family.A, random_curve(Family.A, rng))
        s = np.array([-0.5, 0.0, 0.5])
        t = np.array([0.7, 1.1, 1.9])
        normal, h = closed_form_arrays(surface, s, t)
        for k in range(3):
            n_k, h_k = closed_form_N_H(surface, s[k], t[k])
            assert h[k] == pytest.approx(h_k)
            assert normal[:, k] == pytest.approx(n_k.as_array())


class TestSurfaceConstruction:
    def test_family_mismatch(self, rng):
        with pytest.raises(DomainError):
            InvariantSurface(Family.N, random_curve(Family.K, rng))

    def test_a_family_needs_positive_fiber(self, rng):
        surface = InvariantSurface(Family.A, random_curve(Family.A, rng))
        with pytest.raises(DomainError):
            surface.position(0.0, -1.0)

    def test_curve_interval(self):
        curve = GeneratingCurve(Family.K, lambda s: stack_jet(s, 1.0, 0.0, 1.0 + 0.0 * np.asarray(s), 0.0, 0.0),
                                interval=(-1.0, 1.0))
        with pytest.raises(DomainError):
            curve.evaluate(1.5)
        assert curve.samples(5).tolist() == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_singular_curve_rejected(self):
        still = GeneratingCurve(Family.K, lambda s: stack_jet(0.0, 0.0, 0.0, 1.0, 0.0, 0.0))
        with pytest.raises(RegularityError):
            closed_form_N_H(InvariantSurface(Family.K, still), 0.0, 0.0)

    def test_positions(self):
        surface = sigma_y0(2.0).member()
        p = surface.position(0.4, -1.0)
        assert (p.x, p.y, p.theta) == (-1.0, 2.0, 0.4)

    def test_speed(self):
        c = stack_jet(2.0, 1.0, 0.0, 0.0, 0.5, 0.0)
        # N family: sqrt(y'^2 + 2 y^2 theta'^2)
        assert speed(Family.N, c) == pytest.approx(math.sqrt(1.0 + 2.0 * 4.0 * 0.25))


class TestAngleForm:
    def test_constant_angle_gives_a_line(self):
        phi0 = 0.7
        start = straight_line(phi0).jet(0.0)[:, 0]
        curve = curve_from_phi(Family.K, lambda s: phi0, start, (0.0, 1.0))
        s = np.linspace(0.0, 1.0, 11)
        assert curve.evaluate(s)[:, 0, :] == pytest.approx(straight_line(phi0).evaluate(s)[:, 0, :], abs=1e-7)
        assert curve.trajectory is not None

    def test_k_mean_curvature_formula(self):
        phi = lambda s: 0.4 * math.sin(2.0 * s)
        dphi = lambda s: 0.8 * math.cos(2.0 * s)
        surface = InvariantSurface(Family.K, curve_from_phi(Family.K, phi, (0.0, 1.0), (0.0, 2.0), dphi))
        for s in (0.3, 1.1, 1.9):
            assert closed_form_N_H(surface, s, 0.0)[1] == pytest.approx(dphi(s) / 2 + math.cos(phi(s)), abs=1e-8)

    def test_floor_event_shortens_interval(self):
        # phi = -pi/2 drives y to 0 exponentially: y = exp(-2s)
        curve = curve_from_phi(Family.K, lambda s: -math.pi / 2, (0.0, 1.0), (0.0, 20.0))
        assert curve.interval[1] == pytest.approx(-0.5 * math.log(1e-6), rel=1e-6)

    def test_a_family_has_no_angle_form(self):
        with pytest.raises(DomainError):
            curve_from_phi(Family.A, lambda s: 0.0, (0.0, 1.0), (0.0, 1.0))

    @pytest.mark.parametrize("phi0", [0.0, math.pi / 3, math.pi / 2, 2.5, -1.0])
    def test_straight_line_mean_curvature(self, phi0):
        surface = InvariantSurface(Family.K, straight_line(phi0, c1=0.2, c2=1.5))
        for s in (-0.3, 0.0, 0.4):
            assert closed_form_N_H(surface, s, 1.0)[1] == pytest.approx(math.cos(phi0), abs=1e-12)


class TestSpecialSurfaces:
    @pytest.mark.parametrize("special", [sigma_x0(1.0), sigma_y0(2.0), sigma_theta0(0.3)], ids=lambda s: s.name)
    def test_members_agree(self, special):
        primary = special.member()
        for family, member in special.members.items():
            for s, t in ((0.2, 1.1), (-0.5, 1.4)):
                s1, t1 = special.to_member[family](s, t)
                assert member.position(s1, t1).as_array() == pytest.approx(primary.position(s, t).as_array(), abs=1e-9)
                normal, h = closed_form_N_H(member, s1, t1)
                assert h == pytest.approx(special.expected_H, abs=1e-8)
                assert normal.as_array() == pytest.approx(special.expected_normal[family].as_array(), abs=1e-8)

    def test_gauss_curvatures(self):
        assert sigma_theta0(0.3).gauss_curvature(0.2, 1.2) == pytest.approx(-4.0, abs=1e-4)
        assert sigma_x0(1.0).gauss_curvature(0.2, 1.2) == pytest.approx(0.0, abs=1e-4)
        assert sigma_y0(2.0).gauss_curvature(0.2, 1.2) == pytest.approx(0.0, abs=1e-4)

    def test_induced_metric(self):
        special = sigma_theta0(0.0)
        forms = oracle_forms(special.member(), 0.3, 1.5)
        assert (forms.E, forms.F, forms.G) == pytest.approx(special.induced_metric(0.3, 1.5), rel=1e-12)

    def test_sigma_theta0_finite_difference_jet(self):
        surface = sigma_theta0(0.3).member()
        fd = jet_finite_difference(surface.evaluator(), 0.2, 1.1, h=1e-3, richardson=False)
        assert fd.max_deviation(jet_analytic(surface, 0.2, 1.1)) < 1e-7

    def test_missing_membership(self):
        with pytest.raises(DomainError):
            sigma_y0(1.0).member(Family.A)
