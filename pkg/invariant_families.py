"""
N-, A- and K-invariant surfaces of SL(2,R)

Generating curves (closed form or integrated in angle form), the surfaces
they sweep under left translations of each Iwasawa subgroup, the closed-form
unit normal and mean curvature of each family, and the three special
surfaces obtained by fixing one coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from config import settings
from immersion_oracle import (
    FundamentalForms,
    SurfaceJet,
    fundamental_forms,
    gauss_curvature_induced,
    jet_finite_difference,
)
from ode_engine import Event, IntegratorConfig, OdeSystem, Termination, Trajectory, integrate
from sl2r_core import (
    CoordVector,
    DomainError,
    FrameVector,
    RegularityError,
    Sl2Point,
    require_positive_y,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


class Family(str, Enum):
    N = "N"
    A = "A"
    K = "K"

    @classmethod
    def parse(cls, name: str) -> "Family":
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise DomainError(f"unknown family {name!r}; expected N, A or K") from None


# coordinate pair carried by the generating curve of each family
CURVE_COORDINATES = {Family.N: ("y", "theta"), Family.A: ("x", "theta"), Family.K: ("x", "y")}

# sign taking the normalized cross product d_s x d_t to the closed-form normal
FAMILY_ALIGNMENT = {Family.N: 1, Family.A: 1, Family.K: -1}

CurveJet = Callable[[object], np.ndarray]


def stack_jet(u, u1, u2, v, v1, v2) -> np.ndarray:
    """Pack two coordinate functions and their derivatives as a (2, 3, ...) array"""
    parts = np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in (u, u1, u2, v, v1, v2)))
    return np.array(parts).reshape((2, 3) + parts[0].shape)


# ============================================================================
# GENERATING CURVES
# ============================================================================

@dataclass(frozen=True)
class GeneratingCurve:
    """
    Planar generating curve with analytic first and second derivatives

    `jet(s)` returns [[u, u', u''], [v, v', v'']] for the family's coordinate
    pair; array arguments broadcast along a trailing axis.
    """

    family: Family
    jet: CurveJet
    interval: Tuple[float, float] = (-math.inf, math.inf)
    phi: Optional[Callable[[object], object]] = None
    name: str = "curve"
    trajectory: Optional[Trajectory] = None

    def contains(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(np.all((s >= self.interval[0]) & (s <= self.interval[1])))

    def evaluate(self, s) -> np.ndarray:
        if not self.contains(s):
            raise DomainError(f"{self.name}: s outside the validity interval {self.interval}")
        return np.asarray(self.jet(s), dtype=float)

    def reparametrized(self, factor: float) -> "GeneratingCurve":
        """The curve s -> alpha(factor * s)"""
        base = self.jet
        lam = float(factor)

        def jet(s):
            c = np.asarray(base(lam * np.asarray(s, dtype=float)), dtype=float)
            scale = np.array([1.0, lam, lam * lam]).reshape((1, 3) + (1,) * (c.ndim - 2))
            return c * scale

        lo, hi = sorted((self.interval[0] / lam, self.interval[1] / lam))
        phi = None if self.phi is None else (lambda s, f=self.phi: f(lam * np.asarray(s, dtype=float)))
        return GeneratingCurve(self.family, jet, (lo, hi), phi, f"{self.name}(x{lam:g})")

    def samples(self, n: int, margin: float = 0.0, default: Tuple[float, float] = (-1.0, 1.0)) -> np.ndarray:
        """n evenly spaced parameters inside the validity interval, shrunk by a relative margin"""
        lo, hi = self.interval
        lo = default[0] if not math.isfinite(lo) else lo
        hi = default[1] if not math.isfinite(hi) else hi
        pad = margin * (hi - lo)
        return np.linspace(lo + pad, hi - pad, n)


def _phi_derivative(phi: Callable, dphi: Optional[Callable], s: float) -> float:
    if dphi is not None:
        return float(dphi(s))
    h = 1e-5 * max(1.0, abs(s))
    return float((phi(s + h) - phi(s - h)) / (2 * h))


def angle_form_rhs(family: Family, phi_value: float, state: np.ndarray) -> np.ndarray:
    """Right-hand side of the angle-form curve equations for the N or K family"""
    if family is Family.N:
        y = state[0]
        return np.array([SQRT2 * y * math.cos(phi_value), math.sin(phi_value)])
    y = state[1]
    return np.array([2.0 * y * math.cos(phi_value), 2.0 * y * math.sin(phi_value)])


def angle_form_second(family: Family, phi_value: float, dphi: float, state: np.ndarray) -> np.ndarray:
    c, s = math.cos(phi_value), math.sin(phi_value)
    if family is Family.N:
        y = state[0]
        y1 = SQRT2 * y * c
        return np.array([SQRT2 * (y1 * c - y * dphi * s), dphi * c])
    y = state[1]
    y1 = 2.0 * y * s
    return np.array([2.0 * y1 * c - 2.0 * y * dphi * s, 2.0 * y1 * s + 2.0 * y * dphi * c])


def curve_from_phi(
    family: Family,
    phi: Callable[[float], float],
    initial_point: Sequence[float],
    s_range: Tuple[float, float],
    dphi: Optional[Callable[[float], float]] = None,
    config: Optional[IntegratorConfig] = None,
) -> GeneratingCurve:
    """
    Integrate the angle-form equations for a prescribed angle function

    N family: y' = sqrt2 y cos(phi), theta' = sin(phi); state (y, theta).
    K family: x' = 2 y cos(phi), y' = 2 y sin(phi); state (x, y).
    Integration starts at s_range[0] and stops early at the y > 0 boundary;
    the curve's validity interval is the range actually covered.
    """
    family = Family(family)
    if family is Family.A:
        raise DomainError("the A family has no angle form")
    y_index = 0 if family is Family.N else 1
    require_positive_y(float(initial_point[y_index]))

    floor = Event("y floor", lambda s, u: u[y_index] - settings.y_floor)
    system = OdeSystem(
        name=f"{family.value}-angle-form",
        dimension=2,
        rhs=lambda s, u: angle_form_rhs(family, float(phi(s)), u),
        domain=lambda u: u[y_index] > 0.0,
        events=(floor,),
        state_names=CURVE_COORDINATES[family],
    )
    trajectory = integrate(system, initial_point, s_range, config)
    if trajectory.termination is Termination.STEP_FAILURE:
        logger.warning(f"{system.name}: integration failed: {trajectory.message}")
    lo, hi = sorted((float(trajectory.s[0]), float(trajectory.s[-1])))

    def jet(s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        values = trajectory.dense(s_arr)
        out = np.empty((2, 3, s_arr.size))
        for k, (si, ui) in enumerate(zip(s_arr, values)):
            ph = float(phi(si))
            out[:, 0, k] = ui
            out[:, 1, k] = angle_form_rhs(family, ph, ui)
            out[:, 2, k] = angle_form_second(family, ph, _phi_derivative(phi, dphi, si), ui)
        return out[..., 0] if np.ndim(s) == 0 else out

    return GeneratingCurve(family, jet, (lo, hi), phi, f"{family.value}-angle-curve", trajectory)


def random_curve(family: Family, rng: np.random.Generator, degenerate: Optional[str] = None) -> GeneratingCurve:
    """
    Smooth regular test curve with random coefficients

    `degenerate` forces an identically vanishing quantity on A-family
    curves: "theta'" (constant theta), "x'" (constant x) or "x" (x = 0).
    """
    family = Family(family)
    a0, a1 = rng.uniform(-0.3, 0.3), rng.uniform(0.1, 0.4)
    b1, p1 = rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi)
    c0 = rng.uniform(-1.0, 1.0)
    c1 = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5)
    b2, p2 = rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi)
    c2 = rng.uniform(-0.4, 0.4) * abs(c1) / b2
    slope = rng.uniform(0.5, 1.5)
    wiggle = rng.uniform(-0.4, 0.4) * slope / b1

    def exp_part(s):
        g = a0 + a1 * np.sin(b1 * s + p1)
        g1 = a1 * b1 * np.cos(b1 * s + p1)
        g2 = -a1 * b1 * b1 * np.sin(b1 * s + p1)
        e = np.exp(g)
        return e, g1 * e, (g2 + g1 * g1) * e

    def angle_part(s):
        return (c0 + c1 * s + c2 * np.sin(b2 * s + p2),
                c1 + c2 * b2 * np.cos(b2 * s + p2),
                -c2 * b2 * b2 * np.sin(b2 * s + p2))

    def graph_part(s):
        return (c0 + slope * s + wiggle * np.sin(b1 * s + p1),
                slope + wiggle * b1 * np.cos(b1 * s + p1),
                -wiggle * b1 * b1 * np.sin(b1 * s + p1))

    if family is Family.N:
        return GeneratingCurve(family, lambda s: stack_jet(*exp_part(s), *angle_part(s)), name="random-N")
    if family is Family.K:
        return GeneratingCurve(family, lambda s: stack_jet(*graph_part(s), *exp_part(s)), name="random-K")

    def a_jet(s):
        x, x1, x2 = graph_part(s)
        th, th1, th2 = angle_part(s)
        zero = np.zeros_like(np.asarray(s, dtype=float))
        if degenerate == "theta'":
            th, th1, th2 = c0 + zero, zero, zero
        elif degenerate == "x'":
            x, x1, x2 = c0 + zero, zero, zero
        elif degenerate == "x":
            x, x1, x2 = zero, zero, zero
        return stack_jet(x, x1, x2, th, th1, th2)

    return GeneratingCurve(family, a_jet, name=f"random-A{'-' + degenerate if degenerate else ''}")


# ============================================================================
# INVARIANT SURFACES
# ============================================================================

@dataclass(frozen=True)
class InvariantSurface:
    family: Family
    curve: GeneratingCurve
    orientation: int = 1

    def __post_init__(self):
        if self.curve.family is not self.family:
            raise DomainError(f"curve of family {self.curve.family.value} used for a {self.family.value}-invariant surface")
        if self.orientation not in (1, -1):
            raise DomainError(f"orientation must be +1 or -1, got {self.orientation!r}")

    def flipped(self) -> "InvariantSurface":
        return InvariantSurface(self.family, self.curve, -self.orientation)

    def check_fiber(self, t) -> None:
        if self.family is Family.A and not np.all(np.asarray(t, dtype=float) > 0.0):
            raise DomainError("the A-family fiber parameter t must be positive")

    def coordinates(self, s, t) -> np.ndarray:
        """(x, y, theta) arrays of the immersion"""
        self.check_fiber(t)
        c = self.curve.evaluate(s)
        t = np.asarray(t, dtype=float)
        if self.family is Family.N:
            x, y, theta = t, c[0, 0], c[1, 0]
        elif self.family is Family.A:
            x, y, theta = c[0, 0], t, c[1, 0]
        else:
            x, y, theta = c[0, 0], c[1, 0], t
        x, y, theta = np.broadcast_arrays(x, y, theta)
        if not np.all(y > 0.0):
            raise DomainError("immersion left the domain y > 0")
        return np.array([x, y, theta])

    def position(self, s: float, t: float) -> Sl2Point:
        return Sl2Point.from_array(self.coordinates(s, t))

    def evaluator(self) -> Callable[[float, float], Sl2Point]:
        return self.position


def jet_analytic(surface: InvariantSurface, s: float, t: float) -> SurfaceJet:
    """Immersion jet assembled from the generating curve's derivatives"""
    surface.check_fiber(t)
    c = surface.curve.evaluate(s)
    zero = CoordVector(0.0, 0.0, 0.0)
    if surface.family is Family.N:
        d_s = CoordVector(0.0, c[0, 1], c[1, 1])
        d_t = CoordVector(1.0, 0.0, 0.0)
        d_ss = CoordVector(0.0, c[0, 2], c[1, 2])
    elif surface.family is Family.A:
        d_s = CoordVector(c[0, 1], 0.0, c[1, 1])
        d_t = CoordVector(0.0, 1.0, 0.0)
        d_ss = CoordVector(c[0, 2], 0.0, c[1, 2])
    else:
        d_s = CoordVector(c[0, 1], c[1, 1], 0.0)
        d_t = CoordVector(0.0, 0.0, 1.0)
        d_ss = CoordVector(c[0, 2], c[1, 2], 0.0)
    return SurfaceJet(surface.position(s, t), d_s, d_t, d_ss, zero, zero)


def oracle_forms(surface: InvariantSurface, s: float, t: float, jets: str = "analytic",
                 h: Optional[float] = None) -> FundamentalForms:
    """Oracle fundamental forms with the family-aligned, oriented normal"""
    if jets == "analytic":
        jet = jet_analytic(surface, s, t)
    elif jets == "fd":
        jet = jet_finite_difference(surface.evaluator(), s, t, h)
    else:
        raise DomainError(f"unknown jet kind {jets!r}")
    return fundamental_forms(jet, surface.orientation * FAMILY_ALIGNMENT[surface.family])


def closed_form_arrays(surface: InvariantSurface, s, t) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized closed-form normal (frame components along axis 0) and mean curvature"""
    surface.check_fiber(t)
    c = surface.curve.evaluate(s)
    t = np.asarray(t, dtype=float)
    sign = surface.orientation
    if surface.family is Family.N:
        y, y1, y2 = c[0]
        th1, th2 = c[1, 1], c[1, 2]
        phi = np.sqrt(y1 * y1 + 2.0 * y * y * th1 * th1)
        _require_regular(phi)
        normal = np.array([y1 / (SQRT2 * phi), SQRT2 * y * th1 / phi, -y1 / (SQRT2 * phi)])
        h = SQRT2 * y * y * (th1 * y2 - y1 * th2 + 2.0 * y * th1**3) / phi**3
    elif surface.family is Family.A:
        x1, x2 = c[0, 1], c[0, 2]
        th1, th2 = c[1, 1], c[1, 2]
        a = x1 + 2.0 * t * th1
        phi = np.sqrt(a * a + x1 * x1)
        _require_regular(phi)
        zero = np.zeros_like(phi)
        normal = np.array([-a / phi, zero, x1 / phi])
        h = 2.0 * t * t * (x1 * th2 - th1 * x2) / phi**3
    else:
        x1, x2 = c[0, 1], c[0, 2]
        y, y1, y2 = c[1]
        phi = np.sqrt(x1 * x1 + y1 * y1)
        _require_regular(phi)
        zero = np.zeros_like(phi)
        normal = np.array([-y1 / phi, x1 / phi, zero])
        h = (y * (x1 * y2 - x2 * y1) + x1 * phi * phi) / phi**3
    shape = np.broadcast(np.asarray(h), t).shape
    normal = np.array([np.broadcast_to(component, shape) for component in normal])
    return sign * normal, sign * np.broadcast_to(h, shape).astype(float)


def _require_regular(phi) -> None:
    if not np.all(np.asarray(phi) > 0.0):
        raise RegularityError("generating curve has vanishing speed")


def closed_form_N_H(surface: InvariantSurface, s: float, t: float) -> Tuple[FrameVector, float]:
    """Closed-form unit normal and mean curvature of an invariant surface"""
    normal, h = closed_form_arrays(surface, float(s), float(t))
    return FrameVector.from_array(np.asarray(normal, dtype=float).reshape(3)), float(h)


def straight_line(phi0: float, c1: float = 0.0, c2: float = 1.0) -> GeneratingCurve:
    """
    Rotational generating curve with constant angle phi0

    sin(phi0) = 0 gives the horizontal line (2 c2 cos(phi0) s + c1, c2);
    otherwise x = c1 + c2 cot(phi0) e^{2 s sin(phi0)}, y = c2 e^{2 s sin(phi0)}.
    """
    require_positive_y(c2)
    sin0, cos0 = math.sin(phi0), math.cos(phi0)
    if abs(sin0) < 1e-15:
        sign = 1.0 if cos0 > 0 else -1.0

        def jet(s):
            s = np.asarray(s, dtype=float)
            return stack_jet(2.0 * c2 * sign * s + c1, 2.0 * c2 * sign, 0.0, c2 + 0.0 * s, 0.0, 0.0)
    else:
        rate, cot = 2.0 * sin0, cos0 / sin0

        def jet(s):
            e = c2 * np.exp(rate * np.asarray(s, dtype=float))
            return stack_jet(c1 + cot * e, cot * rate * e, cot * rate * rate * e, e, rate * e, rate * rate * e)

    return GeneratingCurve(Family.K, jet, phi=lambda s: phi0 + 0.0 * np.asarray(s, float), name=f"line(phi0={phi0:g})")


def speed(surface_family: Family, curve_jet: np.ndarray, t: float = 1.0) -> float:
    """Family-specific speed Phi of a curve jet"""
    c = curve_jet
    if surface_family is Family.N:
        return math.hypot(c[0, 1], SQRT2 * c[0, 0] * c[1, 1])
    if surface_family is Family.A:
        return math.hypot(c[0, 1] + 2.0 * t * c[1, 1], c[0, 1])
    return math.hypot(c[0, 1], c[1, 1])


# ============================================================================
# SPECIAL SURFACES
# ============================================================================

def _constant_curve_jet(u0: float, v_slope: float, family: Family, v0: float = 0.0) -> GeneratingCurve:
    return GeneratingCurve(
        family,
        lambda s: stack_jet(u0 + 0.0 * np.asarray(s, float), 0.0, 0.0, v0 + v_slope * np.asarray(s, float), v_slope, 0.0),
    )


def _exp_curve(family: Family, u0: float, rate: float, first_is_const: bool, name: str) -> GeneratingCurve:
    def jet(s):
        s = np.asarray(s, dtype=float)
        e = np.exp(rate * s)
        const = u0 + 0.0 * s
        if first_is_const:
            return stack_jet(const, 0.0, 0.0, e, rate * e, rate * rate * e)
        return stack_jet(e, rate * e, rate * rate * e, const, 0.0, 0.0)

    return GeneratingCurve(family, jet, name=name)


@dataclass(frozen=True)
class SpecialSurface:
    """A coordinate-fixing surface with its memberships and documented geometry"""

    name: str
    parameter: float
    primary: Family
    members: Dict[Family, InvariantSurface]
    expected_normal: Dict[Family, FrameVector]
    expected_H: float
    expected_gauss: float
    to_member: Dict[Family, Callable[[float, float], Tuple[float, float]]] = field(default_factory=dict)
    induced_metric: Optional[Callable[[float, float], Tuple[float, float, float]]] = None
    fiber_positive: bool = False

    def member(self, family: Optional[Family] = None) -> InvariantSurface:
        family = self.primary if family is None else Family(family)
        if family not in self.members:
            raise DomainError(f"{self.name} is not {family.value}-invariant")
        return self.members[family]

    def gauss_curvature(self, s: float, t: float, h: Optional[float] = None) -> float:
        surface = self.member()
        return gauss_curvature_induced(lambda u, v: jet_analytic(surface, u, v), s, t, h)


def sigma_x0(x0: float) -> SpecialSurface:
    """Hopf cylinder over a geodesic: x = x0"""
    a_member = InvariantSurface(Family.A, GeneratingCurve(
        Family.A, lambda s: stack_jet(x0 + 0.0 * np.asarray(s, float), 0.0, 0.0, s, 1.0, 0.0), name="sigma-x0/A"))
    # angle form with phi = pi/2: y = exp(2s)
    k_curve = _exp_curve(Family.K, x0, 2.0, True, "sigma-x0/K")
    k_curve = GeneratingCurve(Family.K, k_curve.jet, phi=lambda s: math.pi / 2 + 0.0 * np.asarray(s, float), name=k_curve.name)
    return SpecialSurface(
        name="sigma-x0",
        parameter=x0,
        primary=Family.A,
        members={Family.A: a_member, Family.K: InvariantSurface(Family.K, k_curve)},
        expected_normal={Family.A: FrameVector(-1.0, 0.0, 0.0), Family.K: FrameVector(-1.0, 0.0, 0.0)},
        expected_H=0.0,
        expected_gauss=0.0,
        to_member={Family.A: lambda s, t: (s, t), Family.K: lambda s, t: (0.5 * math.log(t), s)},
        induced_metric=lambda s, t: (1.0, 0.0, 1.0 / (4.0 * t * t)),
        fiber_positive=True,
    )


def sigma_y0(y0: float) -> SpecialSurface:
    """Hopf cylinder over a horocycle-type circle: y = y0"""
    require_positive_y(y0)
    n_member = InvariantSurface(Family.N, GeneratingCurve(
        Family.N, lambda s: stack_jet(y0 + 0.0 * np.asarray(s, float), 0.0, 0.0, s, 1.0, 0.0), name="sigma-y0/N"))
    # angle form with phi = 0: x = 2 y0 s
    k_member = InvariantSurface(Family.K, GeneratingCurve(
        Family.K, lambda s: stack_jet(2.0 * y0 * np.asarray(s, float), 2.0 * y0, 0.0, y0 + 0.0 * np.asarray(s, float), 0.0, 0.0),
        phi=lambda s: 0.0 * np.asarray(s, float), name="sigma-y0/K"))
    return SpecialSurface(
        name="sigma-y0",
        parameter=y0,
        primary=Family.N,
        members={Family.N: n_member, Family.K: k_member},
        expected_normal={Family.N: FrameVector(0.0, 1.0, 0.0), Family.K: FrameVector(0.0, 1.0, 0.0)},
        expected_H=1.0,
        expected_gauss=0.0,
        to_member={Family.N: lambda s, t: (s, t), Family.K: lambda s, t: (t / (2.0 * y0), s)},
        induced_metric=lambda s, t: (1.0, 1.0 / (2.0 * y0), 1.0 / (2.0 * y0 * y0)),
    )


def sigma_theta0(theta0: float) -> SpecialSurface:
    """Totally geodesic-type hyperbolic plane: theta = theta0"""
    a_member = InvariantSurface(Family.A, GeneratingCurve(
        Family.A, lambda s: stack_jet(s, 1.0, 0.0, theta0 + 0.0 * np.asarray(s, float), 0.0, 0.0), name="sigma-theta0/A"))
    # angle form with phi = 0: y = exp(sqrt2 s)
    n_curve = _exp_curve(Family.N, theta0, SQRT2, False, "sigma-theta0/N")
    n_curve = GeneratingCurve(Family.N, n_curve.jet, phi=lambda s: 0.0 * np.asarray(s, float), name=n_curve.name)
    r = 1.0 / SQRT2
    return SpecialSurface(
        name="sigma-theta0",
        parameter=theta0,
        primary=Family.A,
        members={Family.A: a_member, Family.N: InvariantSurface(Family.N, n_curve)},
        expected_normal={Family.N: FrameVector(r, 0.0, -r), Family.A: FrameVector(-r, 0.0, r)},
        expected_H=0.0,
        expected_gauss=-4.0,
        to_member={Family.A: lambda s, t: (s, t), Family.N: lambda s, t: (math.log(t) / SQRT2, s)},
        induced_metric=lambda s, t: (1.0 / (2.0 * t * t), 0.0, 1.0 / (4.0 * t * t)),
        fiber_positive=True,
    )


SPECIAL_SURFACES = {"sigma-x0": sigma_x0, "sigma-y0": sigma_y0, "sigma-theta0": sigma_theta0}
