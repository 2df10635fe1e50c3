"""Tests for translator residuals, reductions, explicit solutions and consistency checks"""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from invariant_families import Family, GeneratingCurve, random_curve, sigma_theta0, sigma_x0, sigma_y0, stack_jet
from ode_engine import IntegratorConfig, Termination
from sl2r_core import DomainError, KillingFieldKind
from translator_lab import (
    CERTIFIED_PSI,
    ResidualGrid,
    SolutionTag,
    TranslatorProblem,
    a_family_poly_coeffs,
    a_family_poly_gap,
    bigraph_certificate,
    cmc_consistency_check,
    explicit_solution,
    ntheta_psi_variants,
    reduction_rhs,
    residual,
    residual_oracle,
    rot_cmc_closed_form,
    row_columns,
    solve_reduction,
    verdict_summary,
    verify_solution,
    verify_surface,
)

A, N, K = Family.A, Family.N, Family.K
DX, DTHETA, V, W = KillingFieldKind.DX, KillingFieldKind.DTHETA, KillingFieldKind.V, KillingFieldKind.W


class TestProblems:
    def test_parse_and_label(self):
        problem = TranslatorProblem.parse("k", "DTheta")
        assert problem == TranslatorProblem(K, DTHETA)
        assert problem.label == "(K, dtheta)"

    def test_orientation_must_be_a_sign(self):
        with pytest.raises(DomainError):
            TranslatorProblem(K, DX, orientation=0)

    def test_family_must_match_surface(self):
        with pytest.raises(DomainError):
            residual(TranslatorProblem(N, DX), sigma_theta0(0.3).member(), 0.0, 1.0)

    def test_point_residuals_agree(self):
        surface = sigma_theta0(0.3).member()
        problem = TranslatorProblem(A, V)
        assert residual(problem, surface, 0.2, 1.3) == pytest.approx(0.0, abs=1e-12)
        assert residual_oracle(problem, surface, 0.2, 1.3) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.usefixtures("small_grid")
class TestCertification:
    @pytest.mark.parametrize("field", [V, W])
    def test_sigma_theta0(self, field):
        report = verify_surface(TranslatorProblem(A, field), sigma_theta0(0.3).member(), name="sigma-theta0")
        assert report.certified
        assert report.certifying_orientation == 1
        assert verdict_summary(report) == "translator"

    @pytest.mark.parametrize("x0", [-1.0, 0.0, 2.0])
    def test_sigma_x0_dtheta(self, x0):
        assert verify_surface(TranslatorProblem(A, DTHETA), sigma_x0(x0).member()).certified

    def test_flipped_orientation_also_certifies(self):
        report = verify_surface(TranslatorProblem(A, V, orientation=-1), sigma_theta0(0.3).member())
        assert report.certified
        assert report.certifying_orientation == -1

    @pytest.mark.parametrize("tag, params, problem", [
        (SolutionTag.NX_MINIMAL, {"c1": 1.0, "c2": 0.5}, TranslatorProblem(N, DX)),
        (SolutionTag.NV, {"c": 1.0, "s0": 0.0}, TranslatorProblem(N, V)),
        (SolutionTag.NTHETA_GENERAL, {}, TranslatorProblem(N, DTHETA)),
        (SolutionTag.ROT_LINE_V, {}, TranslatorProblem(K, DTHETA)),
        (SolutionTag.ROT_LINE_V, {}, TranslatorProblem(K, V)),
    ])
    def test_explicit_solutions(self, tag, params, problem):
        report = verify_solution(explicit_solution(tag, **params), problem)
        assert report.max_abs_residual < 1e-7
        assert report.consistency_gap < 1e-5

    def test_sigma_theta0_dtheta_residual(self):
        report = verify_surface(TranslatorProblem(A, DTHETA), sigma_theta0(0.3).member())
        assert report.max_abs_residual == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        assert not report.certified

    @pytest.mark.parametrize("field", list(KillingFieldKind))
    def test_sigma_y0_refuted(self, field):
        report = verify_surface(TranslatorProblem(N, field), sigma_y0(1.0).member(), name="sigma-y0")
        assert report.refutes()
        assert verdict_summary(report) == "not a translator"
        if field in (DX, DTHETA):
            # H = 1 and the normal e2 is orthogonal to both fields
            assert report.max_abs_residual == pytest.approx(1.0, abs=1e-10)

    def test_report_dict(self):
        report = verify_surface(TranslatorProblem(A, V), sigma_theta0(0.3).member(), name="sigma-theta0")
        d = report.to_dict()
        assert d["problem"] == {"family": "A", "field": "v", "orientation": 1}
        assert d["surface"] == "sigma-theta0"
        assert (d["grid"]["ns"], d["grid"]["nt"]) == (9, 5)
        assert d["grid"]["t_range"] == [0.5, 2.0]
        assert d["certified"] is True
        assert d["failures"] == []

    def test_explicit_grid(self):
        grid = ResidualGrid(ns=3, nt=2, s_range=(-1.0, 1.0), t_range=(1.0, 2.0))
        report = verify_surface(TranslatorProblem(A, V), sigma_theta0(0.3).member(), grid)
        assert report.closed_form.shape == (3, 2)
        assert report.s_values.tolist() == [-1.0, 0.0, 1.0]

    def test_empty_grid_rejected(self):
        with pytest.raises(DomainError):
            verify_surface(TranslatorProblem(A, V), sigma_theta0(0.3).member(), ResidualGrid(ns=0, nt=3))

    def test_wrong_family_solution(self):
        with pytest.raises(DomainError):
            verify_solution(explicit_solution(SolutionTag.NV), TranslatorProblem(K, V))

    def test_threaded_rows_match(self, monkeypatch):
        problem = TranslatorProblem(A, W)
        surface = sigma_theta0(0.3).member()
        serial = verify_surface(problem, surface)
        monkeypatch.setattr("config.settings.num_threads", 4)
        threaded = verify_surface(problem, surface)
        assert np.array_equal(serial.oracle, threaded.oracle)


class TestAFamilyPolynomial:
    def test_diagonal_curve(self):
        diagonal = GeneratingCurve(A, lambda s: stack_jet(s, 1.0, 0.0, s, 1.0, 0.0))
        assert a_family_poly_coeffs(DX, diagonal, 0.4) == pytest.approx([1.0, 2.0, 2.0])

    def test_matches_scaled_residual(self, rng):
        for kind in KillingFieldKind:
            curve = random_curve(A, rng)
            for s, t in ((-0.5, 0.5), (0.5, 1.5)):
                assert a_family_poly_gap(kind, curve, s, t) < 1e-9

    def test_vanishes_on_translators(self):
        assert max(abs(c) for c in a_family_poly_coeffs(DX, sigma_theta0(0.3).member().curve, 0.2)) < 1e-12
        assert max(abs(c) for c in a_family_poly_coeffs(DTHETA, sigma_x0(1.0).member().curve, 0.2)) < 1e-12

    def test_needs_a_family(self, rng):
        with pytest.raises(DomainError):
            a_family_poly_coeffs(DX, random_curve(K, rng), 0.0)


class TestReductions:
    def test_autonomous_reduction(self):
        assert reduction_rhs(TranslatorProblem(K, DX), (1.0, 0.0), autonomous=True) == pytest.approx([0.0, -2.0])

    def test_k_dtheta(self):
        assert reduction_rhs(TranslatorProblem(K, DTHETA), (0.0, 1.0, 0.0)) == pytest.approx([2.0, 0.0, -2.0])

    def test_n_v(self):
        assert reduction_rhs(TranslatorProblem(N, V), (1.0, 0.0, 0.0)) == pytest.approx([0.0, -1.0, 1.0])

    def test_n_dtheta_equilibrium_angle(self):
        phi = -math.atan(1.0 / math.sqrt(2.0))
        assert reduction_rhs(TranslatorProblem(N, DTHETA), (1.0, 0.0, phi))[2] == pytest.approx(0.0, abs=1e-14)

    def test_missing_reduction(self):
        with pytest.raises(DomainError):
            reduction_rhs(TranslatorProblem(A, DX), (0.0, 1.0, 0.0))

    def test_rows_on_the_vertical_line(self):
        row = row_columns(TranslatorProblem(K, DTHETA), 0.0, (0.0, 1.0, math.pi / 2))
        assert row["H"] == pytest.approx(0.0, abs=1e-12)
        assert row["residual"] == pytest.approx(0.0, abs=1e-12)
        assert row["theta"] is None

    def test_rows_on_the_minimal_n_curve(self):
        row = row_columns(TranslatorProblem(N, DX), 0.0, (1.0, 0.0, 0.3))
        assert row["H"] == pytest.approx(0.0, abs=1e-12)
        assert row["residual"] == pytest.approx(0.0, abs=1e-12)
        assert row["theta"] == 0.3
        assert row["x"] is None

    def test_autonomous_rows_have_no_x(self):
        row = row_columns(TranslatorProblem(K, DX), 0.0, (1.0, 0.5), autonomous=True)
        assert row["x"] is None
        assert row["phi"] == 0.5


class TestReductionTrajectories:
    @pytest.mark.parametrize("method", ["rk45", "rk4"])
    def test_n_dx_stops_before_y_vanishes(self, method):
        traj = solve_reduction(TranslatorProblem(N, DX), (1.0, 0.0, 0.0), (0.0, 10.0), IntegratorConfig(method=method))
        assert traj.termination is Termination.EVENT
        # y = cos(sqrt2 s) from this start
        assert traj.event_s == pytest.approx(math.pi / (2.0 * math.sqrt(2.0)), abs=1e-3)
        assert np.all(traj.states[:, 0] > 0.0)

    def test_n_v_stops_before_y_vanishes(self):
        traj = solve_reduction(TranslatorProblem(N, V), (1.0, 0.0, 0.0), (0.0, 10.0), IntegratorConfig(method="rk4"))
        assert traj.termination is Termination.EVENT
        # y = (1 + cos(sqrt2 s)) / 2 vanishes at pi / sqrt2
        assert traj.event_s == pytest.approx(math.pi / math.sqrt(2.0), abs=5e-2)
        assert traj.event_s < math.pi / math.sqrt(2.0)
        assert np.all(traj.states[:, 0] > 0.0)

    def test_autonomous_runs_agree_across_tolerances(self):
        problem = TranslatorProblem(K, DX)
        for s_end in (1.0, 2.5, 5.0):
            loose = solve_reduction(problem, (1.0, 0.0), (0.0, s_end), IntegratorConfig(rtol=1e-8, atol=1e-11),
                                    autonomous=True)
            tight = solve_reduction(problem, (1.0, 0.0), (0.0, s_end), IntegratorConfig(rtol=1e-10, atol=1e-13),
                                    autonomous=True)
            assert loose.termination is Termination.REACHED_END
            assert tight.termination is Termination.REACHED_END
            assert np.max(np.abs(loose.final_state - tight.final_state)) < 1e-7

    @pytest.mark.parametrize("y0", [1.0, 2.0])
    def test_autonomous_decay_follows_quarter_over_s(self, y0):
        traj = solve_reduction(TranslatorProblem(K, DX), (y0, 0.0), (0.0, 20.0), autonomous=True)
        assert traj.termination is Termination.REACHED_END
        assert 80.0 * traj.final_state[0] == pytest.approx(1.0, rel=0.05)


class TestExplicitSolutions:
    @pytest.mark.parametrize("tag", list(SolutionTag))
    def test_defining_identities(self, tag):
        assert explicit_solution(tag).max_ode_residual() < 1e-9

    def test_unknown_parameter(self):
        with pytest.raises(DomainError):
            explicit_solution(SolutionTag.NV, c=1.0, bogus=2.0)

    def test_tag_parsing(self):
        assert SolutionTag.parse(" ROT_CMC_SUB ") is SolutionTag.ROT_CMC
        assert SolutionTag.parse("nv") is SolutionTag.NV
        with pytest.raises(DomainError):
            SolutionTag.parse("catenoid")

    def test_slant_needs_nonhorizontal_angle(self):
        with pytest.raises(DomainError):
            explicit_solution(SolutionTag.ROT_LINE_SLANT, phi0=0.0)

    def test_bad_parameters(self):
        with pytest.raises(DomainError):
            explicit_solution(SolutionTag.ROT_CMC, H=-1.0)
        with pytest.raises(DomainError):
            explicit_solution(SolutionTag.NX_MINIMAL, c1=0.0, c2=0.0)
        with pytest.raises(ValueError):
            explicit_solution(SolutionTag.NV, c=-1.0)

    @pytest.mark.parametrize("H, c, y0, cos0", [(0.5, 2.0, 1.0, 1.0), (1.0, 1.5, 1.5, -1.0), (2.0, 1.0, 1.0, 1.0)])
    def test_rot_cmc_start(self, H, c, y0, cos0):
        f = rot_cmc_closed_form(H, c, 0.0)
        assert float(f["x"]) == pytest.approx(0.0)
        assert float(f["y"]) == pytest.approx(y0)
        assert float(f["cos"]) == pytest.approx(cos0)


@given(st.sampled_from([0.0, 0.3, 1.0, 1.7]), st.floats(min_value=-0.7, max_value=0.7))
def test_rot_cmc_angle_is_unit(H, s):
    f = rot_cmc_closed_form(H, 1.0, s)
    assert float(f["cos"]) ** 2 + float(f["sin"]) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestConsistencyChecks:
    def test_only_certified_psi_matches(self):
        results = ntheta_psi_variants()
        assert [r.variant for r in results if r.matches] == [CERTIFIED_PSI]

    def test_minimal_rotational_curve_is_consistent(self):
        assert cmc_consistency_check(0.0).consistent

    def test_half_is_inconsistent(self):
        result = cmc_consistency_check(0.5)
        assert not result.consistent
        assert result.score > 0.1

    def test_horizontal_start_rejected(self):
        assert cmc_consistency_check(0.0, phi0=0.0).score > 1e-5

    def test_negative_h(self):
        with pytest.raises(DomainError):
            cmc_consistency_check(-0.5)

    def test_bigraph_is_a_diagnostic(self):
        cert = bigraph_certificate(s_max=5.0)
        assert cert.s_range[0] <= 0.0 <= cert.s_range[1]
        assert isinstance(cert.turning_points, tuple)
        assert cert.holds == (len(cert.turning_points) == 1)
