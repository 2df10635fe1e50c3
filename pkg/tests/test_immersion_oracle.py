"""Tests for the coordinate-agnostic fundamental-form oracle"""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from immersion_oracle import (
    fundamental_forms,
    gauss_curvature_induced,
    jet_finite_difference,
    mean_curvature_oracle,
    normal_residuals,
)
from sl2r_core import DegenerateJetError, DomainError, Sl2Point

R = 1 / math.sqrt(2)


def horizontal_plane(theta0=0.3):
    """theta = theta0, parametrized by (x, y) = (s, t)"""
    return lambda s, t: Sl2Point(s, t, theta0)


def hopf_cylinder(y0=1.0):
    """y = y0, parametrized by (x, theta) = (t, s)"""
    return lambda s, t: Sl2Point(t, y0, s)


class TestFiniteDifferenceJets:
    def test_plane_is_minimal(self):
        jet = jet_finite_difference(horizontal_plane(), 0.4, 1.3)
        forms = fundamental_forms(jet)
        assert forms.mean_curvature == pytest.approx(0.0, abs=1e-6)
        assert forms.unit_normal.as_array() == pytest.approx([-R, 0.0, R], abs=1e-8)

    @pytest.mark.parametrize("y0", [0.5, 1.0, 2.0])
    def test_cylinder_has_unit_mean_curvature(self, y0):
        jet = jet_finite_difference(hopf_cylinder(y0), 0.7, -0.2)
        forms = fundamental_forms(jet)
        assert forms.mean_curvature == pytest.approx(1.0, abs=1e-5)
        assert forms.unit_normal.as_array() == pytest.approx([0.0, 1.0, 0.0], abs=1e-8)

    def test_first_form_of_the_plane(self):
        forms = fundamental_forms(jet_finite_difference(horizontal_plane(), 0.0, 2.0))
        assert (forms.E, forms.F, forms.G) == pytest.approx((1 / 8, 0.0, 1 / 16), abs=1e-10)

    def test_step_must_be_positive(self):
        with pytest.raises(DomainError):
            jet_finite_difference(horizontal_plane(), 0.0, 1.0, h=0.0)

    def test_stencil_leaving_the_domain(self):
        with pytest.raises(DomainError):
            jet_finite_difference(horizontal_plane(), 0.0, 1e-5, h=1e-4)


@given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.3, max_value=3.0))
def test_orientation_flip_negates_mean_curvature(s, t, y0):
    jet = jet_finite_difference(hopf_cylinder(y0), s, t)
    assert mean_curvature_oracle(jet, -1) == pytest.approx(-mean_curvature_oracle(jet, 1), abs=1e-12)


@given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=0.5, max_value=2.0))
def test_normal_is_unit_and_orthogonal(s, t):
    jet = jet_finite_difference(horizontal_plane(-0.8), s, t)
    assert normal_residuals(jet, fundamental_forms(jet)) < 1e-10


def test_degenerate_jet_rejected():
    jet = jet_finite_difference(lambda s, t: Sl2Point(s + t, 1.0, 0.0), 0.0, 0.0)
    with pytest.raises(DegenerateJetError):
        fundamental_forms(jet)


def test_bad_orientation_rejected():
    jet = jet_finite_difference(horizontal_plane(), 0.0, 1.0)
    with pytest.raises(DomainError):
        fundamental_forms(jet, orientation=0)


def test_gauss_curvature_of_the_plane():
    evaluate = horizontal_plane()
    k = gauss_curvature_induced(lambda s, t: jet_finite_difference(evaluate, s, t, h=1e-3), 0.1, 1.2, h=1e-2)
    assert k == pytest.approx(-4.0, abs=1e-2)


def test_gauss_curvature_of_the_cylinder():
    evaluate = hopf_cylinder(1.5)
    k = gauss_curvature_induced(lambda s, t: jet_finite_difference(evaluate, s, t), 0.3, 0.4)
    assert k == pytest.approx(0.0, abs=1e-4)


def test_jet_deviation():
    a = jet_finite_difference(horizontal_plane(), 0.2, 1.1)
    b = jet_finite_difference(horizontal_plane(), 0.2, 1.1, h=2e-4)
    assert a.max_deviation(b) < 1e-6
    assert np.all(np.isfinite(np.concatenate(a.arrays())))


def test_richardson_sharpens_second_derivatives():
    def evaluate(s, t):
        return Sl2Point(math.sin(s), 1.0 + t * t, s * t)

    exact = np.array([-math.sin(0.7), 0.0, 0.0])
    plain = jet_finite_difference(evaluate, 0.7, 0.3, h=1e-2, richardson=False)
    sharp = jet_finite_difference(evaluate, 0.7, 0.3, h=1e-2, richardson=True)
    plain_err = np.max(np.abs(plain.d_ss.as_array() - exact))
    sharp_err = np.max(np.abs(sharp.d_ss.as_array() - exact))
    assert sharp_err < plain_err / 100


def test_central_differences_are_second_order():
    def evaluate(s, t):
        return Sl2Point(math.sin(s), 1.0 + t * t, s * t)

    s, t = 0.7, 0.3
    errors_ss, errors_s = [], []
    for h in (1e-2, 5e-3):
        jet = jet_finite_difference(evaluate, s, t, h=h, richardson=False)
        errors_ss.append(abs(jet.d_ss.as_array()[0] + math.sin(s)))
        errors_s.append(abs(jet.d_s.as_array()[0] - math.cos(s)))
    assert 1.9 <= math.log2(errors_ss[0] / errors_ss[1]) <= 2.1
    assert 1.9 <= math.log2(errors_s[0] / errors_s[1]) <= 2.1
