"""
Surface suites - closed-form normals and mean curvature against the oracle,
and the three coordinate-fixing special surfaces
"""
import logging
import math
from typing import Callable, List

import numpy as np

from base_suite import BaseSuite
from config import settings
from immersion_oracle import normal_residuals
from invariant_families import (
    Family,
    InvariantSurface,
    SpecialSurface,
    closed_form_N_H,
    curve_from_phi,
    jet_analytic,
    oracle_forms,
    random_curve,
    sigma_theta0,
    sigma_x0,
    sigma_y0,
    straight_line,
)
from sl2r_core import KillingFieldKind, killing_at
from translator_lab import FIBER_RANGES

logger = logging.getLogger(__name__)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def sample_parameters(rng: np.random.Generator, family: Family, n: int):
    s_values = rng.uniform(-1.0, 1.0, n)
    lo, hi = FIBER_RANGES[family]
    return list(zip(s_values, rng.uniform(lo, hi, n)))


class ClosedFormSuite(BaseSuite):
    """Closed-form N and H of each family against the immersion oracle"""

    def __init__(self):
        super().__init__("closed-forms")
        self.curves = self.config.get("curves", 50)
        self.samples = self.config.get("samples", 20)

    def run(self) -> None:
        rng = np.random.default_rng(settings.random_seed + 10)
        for family in Family:
            surfaces = [InvariantSurface(family, random_curve(family, rng)) for _ in range(self.curves)]
            params = [sample_parameters(rng, family, self.samples) for _ in surfaces]
            self._family_checks(family, surfaces, params)

        self._angle_form_checks()

    def _family_checks(self, family: Family, surfaces: List[InvariantSurface], params) -> None:
        def worst(measure: Callable[[InvariantSurface, float, float], float]) -> float:
            return max(measure(surface, s, t) for surface, pts in zip(surfaces, params) for s, t in pts)

        def h_error(surface, s, t):
            _, h = closed_form_N_H(surface, s, t)
            return _relative(oracle_forms(surface, s, t).mean_curvature, h)

        def normal_error(surface, s, t):
            normal, _ = closed_form_N_H(surface, s, t)
            return float(np.max(np.abs(oracle_forms(surface, s, t).unit_normal.as_array() - normal.as_array())))

        def fd_error(surface, s, t):
            _, h = closed_form_N_H(surface, s, t)
            return _relative(oracle_forms(surface, s, t, jets="fd").mean_curvature, h)

        def flip_error(surface, s, t):
            _, h = closed_form_N_H(surface, s, t)
            return abs(oracle_forms(surface.flipped(), s, t).mean_curvature + h)

        def normal_conditions(surface, s, t):
            return normal_residuals(jet_analytic(surface, s, t), oracle_forms(surface, s, t))

        def reparametrization(surface, s, t):
            faster = InvariantSurface(family, surface.curve.reparametrized(2.0))
            return _relative(oracle_forms(faster, s / 2.0, t).mean_curvature, oracle_forms(surface, s, t).mean_curvature)

        label = f"{family.value}-family"
        self.check(f"{label}: oracle H vs closed form (relative)", lambda: worst(h_error), 1e-6)
        self.check(f"{label}: oracle normal vs closed form", lambda: worst(normal_error), 1e-8)
        self.check(f"{label}: finite-difference jets H", lambda: worst(fd_error), settings.oracle_tol)
        self.check(f"{label}: orientation flip negates H", lambda: worst(flip_error), 1e-8)
        self.check(f"{label}: normal is unit and orthogonal", lambda: worst(normal_conditions), 1e-10)
        self.check(f"{label}: H invariant under reparametrization", lambda: worst(reparametrization), 1e-8)

        if family is Family.N:
            def t_variation():
                spread = 0.0
                for surface in surfaces:
                    hs = [oracle_forms(surface, 0.3, t).mean_curvature for t in np.linspace(-5.0, 5.0, 11)]
                    spread = max(spread, max(hs) - min(hs))
                return spread

            self.check("N-family: H independent of t", t_variation, 1e-10)

    def _angle_form_checks(self) -> None:
        phi0 = 0.7

        def integrated_line():
            curve = curve_from_phi(Family.K, lambda s: phi0, (straight_line(phi0).jet(0.0)[0, 0], 1.0), (0.0, 1.0))
            s = np.linspace(0.0, 1.0, 21)
            return float(np.max(np.abs(curve.evaluate(s)[:, 0, :] - straight_line(phi0).evaluate(s)[:, 0, :])))

        def speed_normalization():
            phi = lambda s: 0.4 * math.sin(2.0 * s)
            curve = curve_from_phi(Family.K, phi, (0.0, 1.0), (0.0, 2.0))
            c = curve.evaluate(np.linspace(0.0, 2.0, 41))
            return float(np.max(np.abs(np.hypot(c[0, 1], c[1, 1]) - 2.0 * c[1, 0])))

        def k_angle_mean_curvature():
            phi = lambda s: 0.4 * math.sin(2.0 * s)
            dphi = lambda s: 0.8 * math.cos(2.0 * s)
            surface = InvariantSurface(Family.K, curve_from_phi(Family.K, phi, (0.0, 1.0), (0.0, 2.0), dphi))
            return max(
                abs(closed_form_N_H(surface, s, 0.0)[1] - (dphi(s) / 2.0 + math.cos(phi(s))))
                for s in np.linspace(0.0, 2.0, 21)
            )

        def n_vertical():
            curve = curve_from_phi(Family.N, lambda s: math.pi / 2, (1.5, 0.2), (0.0, 2.0))
            c = curve.evaluate(np.linspace(0.0, 2.0, 11))
            return max(float(np.max(np.abs(c[0, 0] - 1.5))), float(np.max(np.abs(c[1, 0] - 0.2 - np.linspace(0.0, 2.0, 11)))))

        self.check("K angle form with constant phi is a straight line", integrated_line, 1e-7)
        self.check("K angle form speed equals 2y", speed_normalization, 1e-12)
        self.check("K angle form H = phi'/2 + cos(phi)", k_angle_mean_curvature, 1e-8)
        self.check("N angle form with phi = pi/2 keeps y constant", n_vertical, 1e-9)


class SpecialSurfaceSuite(BaseSuite):
    """Sigma_x0, Sigma_y0 and Sigma_theta0: normals, H, Gauss curvature and induced metric"""

    def __init__(self):
        super().__init__("special-surfaces")

    def run(self) -> None:
        for special in (sigma_x0(1.0), sigma_y0(2.0), sigma_theta0(0.3)):
            self._surface_checks(special)
        self._sigma_y0_inner_products(sigma_y0(1.0))

    def _grid(self, special: SpecialSurface):
        lo, hi = (1.0, 1.5) if special.fiber_positive else (-2.0, 2.0)
        return [(s, t) for s in np.linspace(-1.0, 1.0, 5) for t in np.linspace(lo, hi, 3)]

    def _surface_checks(self, special: SpecialSurface) -> None:
        grid = self._grid(special)
        name = special.name

        for family, member in special.members.items():
            def h_error(member=member, family=family):
                worst = 0.0
                for s, t in grid:
                    s1, t1 = special.to_member[family](s, t)
                    worst = max(worst, abs(closed_form_N_H(member, s1, t1)[1] - special.expected_H),
                                abs(oracle_forms(member, s1, t1).mean_curvature - special.expected_H))
                return worst

            def normal_error(member=member, family=family):
                expected = special.expected_normal[family].as_array()
                return max(
                    float(np.max(np.abs(closed_form_N_H(member, *special.to_member[family](s, t))[0].as_array() - expected)))
                    for s, t in grid
                )

            def point_sets(member=member, family=family):
                primary = special.member()
                return max(
                    float(np.max(np.abs(primary.position(s, t).as_array()
                                        - member.position(*special.to_member[family](s, t)).as_array())))
                    for s, t in grid
                )

            tag = f"{name}/{family.value}"
            self.check(f"{tag}: H = {special.expected_H:g}", h_error, 1e-8)
            self.check(f"{tag}: normal", normal_error, 1e-8)
            self.check(f"{tag}: same point set as the primary member", point_sets, 1e-9)

        def gauss_error():
            return max(abs(special.gauss_curvature(s, t) - special.expected_gauss) for s, t in grid)

        def metric_error():
            primary = special.member()
            worst = 0.0
            for s, t in grid:
                forms = oracle_forms(primary, s, t)
                expected = special.induced_metric(s, t)
                worst = max(worst, *(_relative(a, b) for a, b in zip((forms.E, forms.F, forms.G), expected)))
            return worst

        self.check(f"{name}: Gauss curvature {special.expected_gauss:g}", gauss_error, 1e-4)
        self.check(f"{name}: induced metric", metric_error, 1e-12)

    def _sigma_y0_inner_products(self, special: SpecialSurface) -> None:
        surface = special.member()
        # <e2, X> at (x, y0): dx -> 0, dtheta -> 0, v -> 1/2, w -> x/2
        expected = {
            KillingFieldKind.DX: lambda x: 0.0,
            KillingFieldKind.DTHETA: lambda x: 0.0,
            KillingFieldKind.V: lambda x: 0.5,
            KillingFieldKind.W: lambda x: 0.5 * x,
        }
        for kind, value in expected.items():
            def deviation(kind=kind, value=value):
                worst = 0.0
                for s, t in self._grid(special):
                    normal, _ = closed_form_N_H(surface, s, t)
                    p = surface.position(s, t)
                    worst = max(worst, abs(normal.dot(killing_at(kind, p)) - value(p.x)))
                return worst

            self.check(f"sigma-y0: <N, {kind.value}>", deviation, 1e-12)
