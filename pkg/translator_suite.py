"""
Translator suites - certifications, refutations, CMC facts, the A-family
polynomial classification and the NTHETA_GENERAL psi variants
"""
import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from base_suite import BaseSuite
from config import settings
from invariant_families import (
    Family,
    GeneratingCurve,
    closed_form_N_H,
    oracle_forms,
    random_curve,
    sigma_theta0,
    sigma_x0,
    sigma_y0,
    stack_jet,
)
from sl2r_core import KillingFieldKind, killing_at
from translator_lab import (
    CERTIFIED_PSI,
    ResidualReport,
    SolutionTag,
    TranslatorProblem,
    a_family_poly_coeffs,
    a_family_poly_gap,
    cmc_consistency_check,
    explicit_solution,
    ntheta_psi_variants,
    verify_solution,
    verify_surface,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def _problem(family: Family, kind: KillingFieldKind) -> TranslatorProblem:
    return TranslatorProblem(family, kind)


class TranslatorCertificationSuite(BaseSuite):
    """Surfaces and explicit solutions whose residual vanishes on the grid"""

    def __init__(self):
        super().__init__("translators")

    def cases(self) -> List[Tuple[str, Callable[[], ResidualReport]]]:
        a, n, k = Family.A, Family.N, Family.K
        kinds = KillingFieldKind
        cases = [
            ("sigma-theta0 / v", lambda: verify_surface(_problem(a, kinds.V), sigma_theta0(0.3).member(), name="sigma-theta0")),
            ("sigma-theta0 / w", lambda: verify_surface(_problem(a, kinds.W), sigma_theta0(0.3).member(), name="sigma-theta0")),
            ("sigma-x0=0 / v", lambda: verify_surface(_problem(a, kinds.V), sigma_x0(0.0).member(), name="sigma-x0")),
        ]
        for x0 in (-1.0, 0.0, 2.0):
            cases.append((f"sigma-x0={x0:g} / dtheta",
                          lambda x0=x0: verify_surface(_problem(a, kinds.DTHETA), sigma_x0(x0).member(), name="sigma-x0")))
        solutions = [
            (SolutionTag.NX_MINIMAL, {"c1": 1.0, "c2": 0.5}, _problem(n, kinds.DX)),
            (SolutionTag.NTHETA_CMC, {"c1": 1.0, "c2": 0.0}, _problem(n, kinds.DTHETA)),
            (SolutionTag.NTHETA_GENERAL, {"c1": 1.0, "c2": 0.0}, _problem(n, kinds.DTHETA)),
            (SolutionTag.NV, {"c": 1.0, "s0": 0.0}, _problem(n, kinds.V)),
            (SolutionTag.ROT_LINE_V, {"c1": 0.0, "c2": 1.0}, _problem(k, kinds.DTHETA)),
            (SolutionTag.ROT_LINE_V, {"c1": 0.0, "c2": 1.0}, _problem(k, kinds.V)),
            (SolutionTag.ROT_LINE_SLANT, {"phi0": math.pi / 2, "c2": 2.0}, _problem(k, kinds.DTHETA)),
        ]
        for tag, params, problem in solutions:
            cases.append((f"{tag.value} / {problem.field.value}",
                          lambda tag=tag, params=params, problem=problem:
                          verify_solution(explicit_solution(tag, **params), problem)))
        return cases

    def run(self) -> None:
        for label, build in self.cases():
            report = self.attempt(label, build)
            if report is None:
                continue
            self.check(f"{label}: max |residual|", lambda: report.max_abs_residual, settings.closed_form_tol)
            self.check(f"{label}: oracle agreement", lambda: report.consistency_gap, settings.consistency_tol)

        nx = explicit_solution(SolutionTag.NX_MINIMAL, c1=1.0, c2=0.5)
        surface = nx.surface()
        grid = [(s, t) for s in nx.samples(15, 0.05) for t in np.linspace(-2.0, 2.0, 5)]
        self.check("nx-minimal: oracle H vanishes",
                   lambda: max(abs(oracle_forms(surface, s, t).mean_curvature) for s, t in grid), 1e-8)
        self.check("nx-minimal: <N, dx> vanishes",
                   lambda: max(abs(closed_form_N_H(surface, s, t)[0].dot(killing_at(KillingFieldKind.DX, surface.position(s, t))))
                               for s, t in grid), 1e-10)

        for tag in SolutionTag:
            self.check(f"{tag.value}: defining ODE residual",
                       lambda tag=tag: explicit_solution(tag).max_ode_residual(), 1e-9)

        # H = 0 while <N, dtheta> = -1/sqrt2: reported, never certified
        self.check(
            "sigma-theta0 / dtheta: |residual| = 1/sqrt2",
            lambda: abs(verify_surface(_problem(Family.A, KillingFieldKind.DTHETA), sigma_theta0(0.3).member())
                        .max_abs_residual - 1.0 / SQRT2),
            1e-12,
        )


class RefutationSuite(BaseSuite):
    """Surfaces whose residual exceeds the refutation threshold somewhere"""

    def __init__(self):
        super().__init__("refutations")

    def run(self) -> None:
        threshold = settings.refutation_threshold
        for kind in KillingFieldKind:
            self._refute(f"sigma-y0 / {kind.value}", threshold, lambda kind=kind: verify_surface(
                _problem(Family.N, kind), sigma_y0(1.0).member(), name="sigma-y0"))
            self._refute(f"rot-line-h / {kind.value}", threshold, lambda kind=kind: verify_solution(
                explicit_solution(SolutionTag.ROT_LINE_H), _problem(Family.K, kind)))

        for h in (0.5, 1.0, 2.0):
            sol = explicit_solution(SolutionTag.ROT_CMC, H=h, c=1.0)
            self._refute(f"rot-cmc(H={h:g}) / w", threshold,
                         lambda sol=sol: verify_solution(sol, _problem(Family.K, KillingFieldKind.W)))

            def n_dot_w(sol=sol):
                surface = sol.surface()
                worst = 0.0
                for s in sol.samples(41, 0.02):
                    forms = oracle_forms(surface, s, 0.4)
                    value = forms.unit_normal.dot(killing_at(KillingFieldKind.W, surface.position(s, 0.4)))
                    worst = max(worst, abs(value - float(sol.n_dot_w(s))))
                return worst

            self.check(f"rot-cmc(H={h:g}): <N, W> closed form", n_dot_w, 1e-8)

    def _refute(self, label: str, threshold: float, build: Callable[[], ResidualReport]) -> None:
        report = self.attempt(label, build)
        if report is None:
            return
        self.check(f"{label}: max |residual|", lambda: report.max_abs_residual, threshold, comparison=">")
        self.check(f"{label}: oracle agreement", lambda: report.consistency_gap, settings.consistency_tol)


class CmcSuite(BaseSuite):
    """Constant mean curvature facts"""

    def __init__(self):
        super().__init__("cmc")

    def run(self) -> None:
        sol = explicit_solution(SolutionTag.NTHETA_CMC, c1=0.7, c2=0.2)
        surface = sol.surface()
        target = -1.0 / SQRT3
        pts = [(s, t) for s in np.linspace(-1.0, 1.0, 9) for t in (-1.0, 0.0, 1.0)]
        self.check("ntheta-cmc: closed-form H = -1/sqrt3",
                   lambda: max(abs(closed_form_N_H(surface, s, t)[1] - target) for s, t in pts), 1e-10)
        self.check("ntheta-cmc: oracle H = -1/sqrt3",
                   lambda: max(abs(oracle_forms(surface, s, t).mean_curvature - target) for s, t in pts), 1e-10)

        for h in (0.0, 0.25, 0.5, 1.0, 2.0):
            result = cmc_consistency_check(h)
            self.record(
                f"cmc consistency H={h:g}: {'consistent' if result.consistent else 'inconsistent'}",
                result.consistent == (h == 0.0),
                result.score,
                detail=f"best phi0={result.best_phi0:.4f}, algebraic residual={result.algebraic_residual:.3e}",
            )
        self.check("cmc consistency H=0, phi=0 rejected", lambda: cmc_consistency_check(0.0, phi0=0.0).score,
                   settings.consistency_tol, comparison=">")
        self.check("cmc consistency H=1/2 mismatch", lambda: cmc_consistency_check(0.5).score, 0.1, comparison=">")

        for h in (0.0, 0.5, 1.0, 2.0):
            cmc = explicit_solution(SolutionTag.ROT_CMC, H=h, c=1.5)
            self.check(f"rot-cmc(H={h:g}): closed-form H",
                       lambda cmc=cmc, h=h: max(abs(closed_form_N_H(cmc.surface(), s, 0.0)[1] - h)
                                                for s in cmc.samples(41, 0.02)), 1e-8)


def _a_curve(x_terms, theta_terms, name: str) -> GeneratingCurve:
    return GeneratingCurve(Family.A, lambda s: stack_jet(*x_terms(np.asarray(s, dtype=float)),
                                                         *theta_terms(np.asarray(s, dtype=float))), name=name)


class APolynomialSuite(BaseSuite):
    """t-polynomial coefficients of the A-family translator equation"""

    def __init__(self):
        super().__init__("a-family-poly")
        self.curves = self.config.get("curves", 100)

    @staticmethod
    def max_coefficient(kind: KillingFieldKind, curve: GeneratingCurve) -> float:
        return max(max(abs(c) for c in a_family_poly_coeffs(kind, curve, s)) for s in np.linspace(-1.0, 1.0, 11))

    def run(self) -> None:
        rng = np.random.default_rng(settings.random_seed + 20)
        generic = [random_curve(Family.A, rng) for _ in range(self.curves)]
        kinds = KillingFieldKind

        for kind in kinds:
            self.check(f"{kind.value}: coefficients nonvanishing on random curves",
                       lambda kind=kind: min(self.max_coefficient(kind, c) for c in generic), 1e-6, comparison=">")
            self.check(f"{kind.value}: polynomial equals Phi^3 residual / 2",
                       lambda kind=kind: max(a_family_poly_gap(kind, c, s, t)
                                             for c in generic[:10] for s in (-0.5, 0.5) for t in (0.5, 1.5)),
                       1e-9)

        degenerate = [
            ("theta' = 0", kinds.DX, random_curve(Family.A, rng, "theta'")),
            ("theta' = 0", kinds.V, random_curve(Family.A, rng, "theta'")),
            ("theta' = 0", kinds.W, random_curve(Family.A, rng, "theta'")),
            ("x' = 0", kinds.DTHETA, random_curve(Family.A, rng, "x'")),
            ("x = 0", kinds.V, random_curve(Family.A, rng, "x")),
            ("sigma-theta0", kinds.DX, sigma_theta0(0.3).member().curve),
            ("sigma-x0", kinds.DTHETA, sigma_x0(1.0).member().curve),
        ]
        for label, kind, curve in degenerate:
            self.check(f"{kind.value}: coefficients vanish for {label}",
                       lambda kind=kind, curve=curve: self.max_coefficient(kind, curve), 1e-10)

        diagonal = _a_curve(lambda s: (s, 1.0 + 0.0 * s, 0.0 * s), lambda s: (s, 1.0 + 0.0 * s, 0.0 * s), "x=s,theta=s")
        self.check("dx: constant coefficient of x = theta = s is 1",
                   lambda: abs(a_family_poly_coeffs(kinds.DX, diagonal, 0.4)[0] - 1.0), 1e-15)


class PsiVariantSuite(BaseSuite):
    """Which psi makes the general dtheta solution solve the angle-form equations"""

    def __init__(self):
        super().__init__("ntheta-psi")

    def run(self) -> None:
        for result in ntheta_psi_variants():
            if result.variant == CERTIFIED_PSI:
                self.check(f"psi = {result.variant}: matches integration", lambda r=result: r.sup_error, 1e-6)
            else:
                self.check(f"psi = {result.variant}: fails", lambda r=result: r.sup_error, 0.1, comparison=">")
