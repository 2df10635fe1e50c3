"""Tests for the NAK chart, metric, frame, connection and Killing fields"""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from sl2r_core import (
    CONNECTION_TABLE,
    DeterminantError,
    DomainError,
    KillingFieldKind,
    MatrixClass,
    Sl2Matrix,
    Sl2Point,
    christoffels_at,
    christoffels_fd,
    classify_matrix,
    compose_nak,
    connection_frame,
    connection_from_christoffels,
    coord_to_frame,
    decompose_nak,
    frame_matrix,
    frame_to_coord,
    inverse_metric_at,
    killing_at,
    killing_equation_residual,
    metric_at,
    metric_compatibility_fd,
    mobius_action,
    torsion_residual,
    FrameVector,
)

points = st.builds(
    Sl2Point,
    st.floats(min_value=-5.0, max_value=5.0),
    # y log-uniform over [1e-3, 1e3]
    st.floats(min_value=-3.0, max_value=3.0).map(lambda e: 10.0 ** e),
    st.floats(min_value=-3.1, max_value=3.1),
)


class TestChart:
    def test_parabolic_example(self):
        p = decompose_nak(Sl2Matrix(1.0, 3.0, 0.0, 1.0))
        assert (p.x, p.y, p.theta) == pytest.approx((3.0, 1.0, 0.0), abs=1e-15)
        assert classify_matrix(Sl2Matrix(1.0, 3.0, 0.0, 1.0)) is MatrixClass.PARABOLIC

    def test_elliptic_example(self):
        m = Sl2Matrix(0.0, 2.0, -0.5, 0.0)
        p = decompose_nak(m)
        assert (p.x, p.y, p.theta) == pytest.approx((0.0, 4.0, math.pi / 2), abs=1e-14)
        assert classify_matrix(m) is MatrixClass.ELLIPTIC

    def test_hyperbolic(self):
        assert classify_matrix(Sl2Matrix(2.0, 0.0, 0.0, 0.5)) is MatrixClass.HYPERBOLIC

    def test_compose_identity(self):
        m = compose_nak(Sl2Point(0.0, 1.0, 0.0))
        assert m.as_array() == pytest.approx(np.eye(2))

    def test_determinant_rejected(self):
        with pytest.raises(DeterminantError):
            Sl2Matrix(1.0, 1.0, 1.0, 1.0)

    def test_nonpositive_y_rejected(self):
        with pytest.raises(DomainError):
            Sl2Point(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            Sl2Point(0.0, -1.0, 0.0)

    @given(points)
    def test_round_trip(self, p):
        q = decompose_nak(compose_nak(p))
        assert q.x == pytest.approx(p.x, abs=1e-9)
        assert q.y == pytest.approx(p.y, rel=1e-9)
        assert math.remainder(q.theta - p.theta, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)

    @given(points)
    def test_mobius_image_of_i(self, p):
        z = mobius_action(compose_nak(p), 1j)
        assert z.real == pytest.approx(p.x, abs=1e-9 * max(1.0, p.y))
        assert z.imag == pytest.approx(p.y, rel=1e-9)

    def test_mobius_needs_upper_half_plane(self):
        with pytest.raises(DomainError):
            mobius_action(Sl2Matrix(1.0, 0.0, 0.0, 1.0), 1.0 + 0j)


class TestMetricAndFrame:
    @given(points)
    def test_frame_is_orthonormal(self, p):
        e = frame_matrix(p)
        assert e.T @ metric_at(p) @ e == pytest.approx(np.eye(3), abs=1e-12)

    @given(points)
    def test_inverse_and_determinant(self, p):
        assert metric_at(p) @ inverse_metric_at(p) == pytest.approx(np.eye(3), abs=1e-10)
        assert np.linalg.det(metric_at(p)) * 16 * p.y**4 == pytest.approx(1.0, rel=1e-10)

    @given(points)
    def test_metric_is_positive_definite(self, p):
        g = metric_at(p)
        minors = [g[0, 0], np.linalg.det(g[:2, :2]), np.linalg.det(g)]
        expected = [1.0 / (2.0 * p.y**2), 1.0 / (8.0 * p.y**4), 1.0 / (16.0 * p.y**4)]
        assert minors == pytest.approx(expected, rel=1e-10, abs=0.0)

    def test_metric_entries(self):
        g = metric_at(Sl2Point(0.7, 2.0, 0.3))
        expected = [[1 / 8, 0, 1 / 4], [0, 1 / 16, 0], [1 / 4, 0, 1]]
        assert g == pytest.approx(np.array(expected))

    def test_frame_conversion(self):
        p = Sl2Point(0.0, 2.0, 0.0)
        w = FrameVector(1.0, -2.0, 0.5)
        assert coord_to_frame(p, frame_to_coord(p, w)).as_array() == pytest.approx(w.as_array())
        # e1 = 2y dx - dtheta
        assert frame_to_coord(p, FrameVector(1.0, 0.0, 0.0)).as_array() == pytest.approx([4.0, 0.0, -1.0])


class TestConnection:
    def test_table_matches_christoffels(self, sample_points):
        for p in sample_points:
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    got = connection_from_christoffels(p, i, j).as_array()
                    assert got == pytest.approx(CONNECTION_TABLE[i - 1, j - 1], abs=1e-9)

    def test_connection_frame_lookup(self):
        assert connection_frame(1, 1).as_array() == pytest.approx(CONNECTION_TABLE[0, 0])

    def test_finite_difference_paths(self, sample_points):
        for p in sample_points[:8]:
            assert np.max(np.abs(christoffels_fd(p) - christoffels_at(p))) * p.y < 1e-5
            assert metric_compatibility_fd(p) * p.y**3 < 1e-5
            for i, j in ((1, 2), (1, 3), (2, 3)):
                assert torsion_residual(p, i, j) < 1e-5


class TestKilling:
    def test_dx_components(self):
        assert killing_at(KillingFieldKind.DX, Sl2Point(0.3, 1.0, 0.0)).as_array() == pytest.approx([0.5, 0.0, 0.5])

    def test_w_components(self):
        # h = (x^2 - y^2) / 2 = 0 at x = y = 1
        assert killing_at(KillingFieldKind.W, Sl2Point(1.0, 1.0, 0.0)).as_array() == pytest.approx([0.0, 0.5, 0.0])

    @pytest.mark.parametrize("kind", list(KillingFieldKind))
    def test_killing_equation(self, kind, sample_points, rng):
        for p in sample_points:
            u, v = rng.normal(size=(2, 3))
            assert abs(killing_equation_residual(kind, p, u, v)) < 1e-5

    def test_parse(self):
        assert KillingFieldKind.parse(" DTheta ") is KillingFieldKind.DTHETA
        with pytest.raises(DomainError):
            KillingFieldKind.parse("dz")


@hyp_settings(max_examples=30)
@given(st.floats(min_value=0.3, max_value=3.0), st.floats(min_value=-2.0, max_value=2.0))
def test_killing_equation_property(y, x):
    p = Sl2Point(x, y, 0.4)
    u = np.array([0.3, -1.0, 0.7])
    v = np.array([1.1, 0.2, -0.5])
    for kind in KillingFieldKind:
        assert abs(killing_equation_residual(kind, p, u, v)) < 1e-5
