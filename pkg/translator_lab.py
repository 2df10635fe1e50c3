"""
Translator residuals, reduction ODEs and explicit solutions

A surface is a translator for the Killing field X when H = <N, X>. This
module evaluates H - <N, X> through the closed forms and through the
immersion oracle, integrates the reduction ODEs for each (family, field)
pair, builds every explicit solution family and runs the consistency
checks around them.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from config import PROBLEM_CONFIGS, settings
from immersion_oracle import normal_residuals
from invariant_families import (
    Family,
    GeneratingCurve,
    InvariantSurface,
    closed_form_arrays,
    jet_analytic,
    oracle_forms,
    stack_jet,
    straight_line,
)
from ode_engine import Event, IntegratorConfig, OdeSystem, Trajectory, integrate
from sl2r_core import (
    DegenerateJetError,
    DomainError,
    KillingFieldKind,
    RegularityError,
    killing_at,
    killing_frame_array,
    require_positive_y,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# default fiber ranges sampled by residual grids
FIBER_RANGES = {Family.N: (-2.0, 2.0), Family.A: (0.5, 2.0), Family.K: (-math.pi, math.pi)}


@dataclass(frozen=True)
class TranslatorProblem:
    family: Family
    field: KillingFieldKind
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "field", KillingFieldKind(self.field))
        if self.orientation not in (1, -1):
            raise DomainError(f"orientation must be +1 or -1, got {self.orientation!r}")

    @classmethod
    def parse(cls, family: str, field_name: str, orientation: int = 1) -> "TranslatorProblem":
        return cls(Family.parse(family), KillingFieldKind.parse(field_name), orientation)

    @property
    def label(self) -> str:
        return f"({self.family.value}, {self.field.value})"


def all_problems() -> List[TranslatorProblem]:
    return [TranslatorProblem(f, k) for f in Family for k in KillingFieldKind]


def _check_family(problem: TranslatorProblem, surface: InvariantSurface) -> None:
    if surface.family is not problem.family:
        raise DomainError(f"{problem.label} needs a {problem.family.value}-invariant surface, "
                          f"got {surface.family.value}")


# ============================================================================
# RESIDUALS
# ============================================================================

def residual_arrays(problem: TranslatorProblem, surface: InvariantSurface, s, t) -> np.ndarray:
    """Vectorized closed-form H - <N, X> at broadcast (s, t)"""
    _check_family(problem, surface)
    normal, h = closed_form_arrays(surface, s, t)
    x, y, _ = surface.coordinates(s, t)
    field_frame = killing_frame_array(problem.field, x, y)
    return h - np.sum(normal * field_frame, axis=0)


def residual(problem: TranslatorProblem, surface: InvariantSurface, s: float, t: float) -> float:
    """H - <N, X> from the closed-form normal and mean curvature"""
    return float(residual_arrays(problem, surface, float(s), float(t)))


def residual_oracle(problem: TranslatorProblem, surface: InvariantSurface, s: float, t: float,
                    jets: str = "analytic") -> float:
    """H - <N, X> from the oracle's fundamental forms"""
    _check_family(problem, surface)
    forms = oracle_forms(surface, s, t, jets)
    p = surface.position(s, t)
    return forms.mean_curvature - forms.unit_normal.dot(killing_at(problem.field, p))


# ============================================================================
# RESIDUAL REPORTS
# ============================================================================

@dataclass(frozen=True)
class ResidualGrid:
    ns: int = field(default_factory=lambda: settings.grid_ns)
    nt: int = field(default_factory=lambda: settings.grid_nt)
    s_range: Optional[Tuple[float, float]] = None
    t_range: Optional[Tuple[float, float]] = None
    margin: float = 0.02

    def axes(self, surface: InvariantSurface) -> Tuple[np.ndarray, np.ndarray]:
        if self.ns < 1 or self.nt < 1:
            raise DomainError("residual grids need at least one sample per axis")
        if self.s_range is None:
            s_values = surface.curve.samples(self.ns, self.margin)
        else:
            s_values = np.linspace(self.s_range[0], self.s_range[1], self.ns)
        lo, hi = self.t_range if self.t_range is not None else FIBER_RANGES[surface.family]
        return s_values, np.linspace(lo, hi, self.nt)


@dataclass(frozen=True, eq=False)
class ResidualReport:
    """Closed-form and oracle residuals over a row-major (s, t) grid"""

    problem: TranslatorProblem
    surface_name: str
    s_values: np.ndarray
    t_values: np.ndarray
    closed_form: np.ndarray
    oracle: np.ndarray
    tolerance: float
    consistency_tol: float
    jets: str = "analytic"
    failures: Tuple[str, ...] = ()

    @property
    def max_abs_residual(self) -> float:
        return float(np.max(np.abs(self.closed_form)))

    @property
    def max_oracle_residual(self) -> float:
        finite = self.oracle[np.isfinite(self.oracle)]
        return float(np.max(np.abs(finite))) if finite.size else math.nan

    @property
    def consistency_gap(self) -> float:
        diff = np.abs(self.closed_form - self.oracle)
        if not np.all(np.isfinite(diff)):
            return math.inf
        return float(np.max(diff))

    @property
    def consistent(self) -> bool:
        return self.consistency_gap < self.consistency_tol

    @property
    def certified(self) -> bool:
        return self.consistent and self.max_abs_residual < self.tolerance

    @property
    def certifying_orientation(self) -> Optional[int]:
        # flipping N flips H as well, so both signs share |residual|
        return self.problem.orientation if self.certified else None

    def refutes(self, threshold: Optional[float] = None) -> bool:
        threshold = settings.refutation_threshold if threshold is None else threshold
        return self.consistent and self.max_abs_residual > threshold

    def to_dict(self) -> dict:
        return {
            "problem": {"family": self.problem.family.value, "field": self.problem.field.value,
                        "orientation": self.problem.orientation},
            "surface": self.surface_name,
            "grid": {"ns": int(self.s_values.size), "nt": int(self.t_values.size),
                     "s_range": [float(self.s_values[0]), float(self.s_values[-1])],
                     "t_range": [float(self.t_values[0]), float(self.t_values[-1])]},
            "jets": self.jets,
            "max_abs_residual": self.max_abs_residual,
            "max_oracle_residual": self.max_oracle_residual,
            "consistency_gap": self.consistency_gap,
            "consistent": self.consistent,
            "tolerance": self.tolerance,
            "certified": self.certified,
            "certifying_orientation": self.certifying_orientation,
            "failures": list(self.failures),
        }


def _oracle_row(problem: TranslatorProblem, surface: InvariantSurface, s: float,
                t_values: np.ndarray, jets: str) -> Tuple[np.ndarray, List[str]]:
    row = np.empty(t_values.size)
    failures = []
    for j, t in enumerate(t_values):
        try:
            row[j] = residual_oracle(problem, surface, float(s), float(t), jets)
        except (DegenerateJetError, DomainError) as e:
            row[j] = math.nan
            failures.append(f"(s={s:.6g}, t={t:.6g}): {e}")
    return row, failures


def verify_surface(
    problem: TranslatorProblem,
    surface: InvariantSurface,
    grid: Optional[ResidualGrid] = None,
    name: str = "",
    jets: str = "analytic",
    tolerance: Optional[float] = None,
) -> ResidualReport:
    """
    Evaluate the residual on a grid through both paths

    Oracle rows are spread over at most settings.num_threads workers;
    rows are collected in order so the report does not depend on scheduling.
    """
    _check_family(problem, surface)
    surface = surface if surface.orientation == problem.orientation else surface.flipped()
    grid = grid or ResidualGrid()
    s_values, t_values = grid.axes(surface)
    s_mesh, t_mesh = np.meshgrid(s_values, t_values, indexing="ij")
    closed = residual_arrays(problem, surface, s_mesh.ravel(), t_mesh.ravel()).reshape(s_mesh.shape)

    workers = max(1, min(settings.num_threads, s_values.size))
    if workers == 1:
        rows = [_oracle_row(problem, surface, s, t_values, jets) for s in s_values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _oracle_row(problem, surface, s, t_values, jets), s_values))
    oracle = np.array([r for r, _ in rows])
    failures = tuple(msg for _, msgs in rows for msg in msgs)

    if tolerance is None:
        tolerance = settings.closed_form_tol if jets == "analytic" else settings.oracle_tol
    report = ResidualReport(
        problem=problem,
        surface_name=name or surface.curve.name,
        s_values=s_values,
        t_values=t_values,
        closed_form=closed,
        oracle=oracle,
        tolerance=tolerance,
        consistency_tol=settings.consistency_tol,
        jets=jets,
        failures=failures,
    )
    if not report.consistent:
        logger.warning(f"{problem.label} on {report.surface_name}: closed form and oracle disagree "
                       f"by {report.consistency_gap:.3e}")
    logger.info(f"{problem.label} on {report.surface_name}: max |residual| = {report.max_abs_residual:.3e}")
    return report


# ============================================================================
# A-FAMILY POLYNOMIAL
# ============================================================================

def a_family_poly_coeffs(field_kind: KillingFieldKind, curve: GeneratingCurve, s: float) -> List[float]:
    """
    Coefficients (ascending powers of t) of Phi^3 * residual / 2 for an A-invariant surface

    The translator equation holds for all t > 0 exactly when every
    coefficient vanishes.
    """
    if curve.family is not Family.A:
        raise DomainError("a_family_poly_coeffs needs an A-family curve")
    c = curve.evaluate(float(s))
    x, x1, x2 = (float(v) for v in c[0])
    th1, th2 = float(c[1, 1]), float(c[1, 2])
    if x1 == 0.0 and th1 == 0.0:
        raise RegularityError("A-family curve has vanishing speed")
    wronskian = x1 * th2 - th1 * x2
    kind = KillingFieldKind(field_kind)
    if kind is KillingFieldKind.DX:
        return [x1 * x1 * th1, 2.0 * x1 * th1 * th1, wronskian + 2.0 * th1**3]
    if kind is KillingFieldKind.DTHETA:
        return [-x1**3, -2.0 * x1 * x1 * th1, wronskian - 2.0 * x1 * th1 * th1]
    if kind is KillingFieldKind.V:
        return [x * x1 * x1 * th1, 2.0 * x * x1 * th1 * th1, wronskian + 2.0 * x * th1**3]
    return [
        0.5 * th1 * x * x * x1 * x1,
        x * x * x1 * th1 * th1,
        wronskian + x * x * th1**3 - 0.5 * x1 * x1 * th1,
        -x1 * th1 * th1,
        -th1**3,
    ]


def a_family_poly_value(field_kind: KillingFieldKind, curve: GeneratingCurve, s: float, t: float) -> float:
    return float(np.polynomial.polynomial.polyval(t, a_family_poly_coeffs(field_kind, curve, s)))


def a_family_poly_gap(field_kind: KillingFieldKind, curve: GeneratingCurve, s: float, t: float) -> float:
    """|poly(t) - Phi^3 * residual / 2| for the positively oriented surface"""
    surface = InvariantSurface(Family.A, curve)
    c = curve.evaluate(float(s))
    x1, th1 = float(c[0, 1]), float(c[1, 1])
    phi = math.hypot(x1 + 2.0 * t * th1, x1)
    scaled = phi**3 * residual(TranslatorProblem(Family.A, field_kind), surface, s, t) / 2.0
    return abs(a_family_poly_value(field_kind, curve, s, t) - scaled)


# ============================================================================
# REDUCTION ODES
# ============================================================================

def reduction_key(problem: TranslatorProblem, autonomous: bool = False) -> Tuple[str, str]:
    key = ("AS" if autonomous else problem.family.value, problem.field.value)
    if key not in PROBLEM_CONFIGS:
        raise DomainError(f"no reduction ODE for {key[0]}/{key[1]}; "
                          f"available: {', '.join('/'.join(k) for k in PROBLEM_CONFIGS)}")
    return key


def reduction_rhs(problem: TranslatorProblem, state: Sequence[float], autonomous: bool = False) -> np.ndarray:
    """
    Derivative of the reduction state

    K family: (x, y, phi); N/dtheta: (y, theta, phi); N/dx: (y, y', theta);
    N/v: (y, f = y'/y, theta); autonomous (K, dx): (y, phi).
    """
    key = reduction_key(problem, autonomous)
    u = np.asarray(state, dtype=float)
    if key == ("AS", "dx"):
        y, phi = u
        require_positive_y(y)
        return np.array([2.0 * y * math.sin(phi), -math.sin(phi) / y - 2.0 * math.cos(phi)])

    if key[0] == "K":
        x, y, phi = u
        require_positive_y(y)
        c, s = math.cos(phi), math.sin(phi)
        if key[1] == "dx":
            dphi = -(s + 2.0 * y * c) / y
        elif key[1] == "dtheta":
            dphi = -2.0 * c
        elif key[1] == "v":
            dphi = -(y * c + x * s) / y
        else:
            dphi = (x - 2.0) * c - (x * x - y * y) * s / (2.0 * y)
        return np.array([2.0 * y * c, 2.0 * y * s, dphi])

    if key[1] == "dtheta":
        y, _, phi = u
        require_positive_y(y)
        return np.array([SQRT2 * y * math.cos(phi), math.sin(phi), math.cos(phi) + SQRT2 * math.sin(phi)])
    if key[1] == "dx":
        y, dy, _ = u
        require_positive_y(y)
        return np.array([dy, -2.0 * y, 1.0])
    y, f, _ = u
    require_positive_y(y)
    return np.array([f * y, -(f * f + 2.0) / 2.0, 1.0])


def reduction_system(problem: TranslatorProblem, autonomous: bool = False) -> OdeSystem:
    """OdeSystem for a reduction with the y > 0 domain and a y floor event"""
    key = reduction_key(problem, autonomous)
    names = tuple(PROBLEM_CONFIGS[key]["state"])
    y_index = names.index("y")
    return OdeSystem(
        name=f"{key[0]}/{key[1]}",
        dimension=len(names),
        rhs=lambda s, u: reduction_rhs(problem, u, autonomous),
        domain=lambda u: u[y_index] > 0.0,
        events=(Event("y floor", lambda s, u: u[y_index] - settings.y_floor),),
        state_names=names,
    )


def solve_reduction(problem: TranslatorProblem, initial_state: Sequence[float], s_span: Sequence[float],
                    config: Optional[IntegratorConfig] = None, autonomous: bool = False) -> Trajectory:
    system = reduction_system(problem, autonomous)
    return integrate(system, initial_state, s_span, config)


def row_columns(problem: TranslatorProblem, s: float, state: Sequence[float],
                autonomous: bool = False) -> Dict[str, Optional[float]]:
    """
    Output columns x, y, theta, phi, H, residual for one reduction state

    Columns that do not apply to the state are None. H and the residual come
    from the closed forms applied to the curve jet implied by the state.
    """
    key = reduction_key(problem, autonomous)
    u = np.asarray(state, dtype=float)
    d = reduction_rhs(problem, u, autonomous)
    row: Dict[str, Optional[float]] = dict.fromkeys(("x", "y", "theta", "phi", "H", "residual"))

    if key[0] in ("K", "AS"):
        if key[0] == "AS":
            x, (y, phi), dphi = None, u, d[1]
        else:
            (x, y, phi), dphi = u, d[2]
        c, sn = math.cos(phi), math.sin(phi)
        y1, x1 = 2.0 * y * sn, 2.0 * y * c
        x2 = 2.0 * y1 * c - 2.0 * y * dphi * sn
        y2 = 2.0 * y1 * sn + 2.0 * y * dphi * c
        speed = math.hypot(x1, y1)
        h = (y * (x1 * y2 - x2 * y1) + x1 * speed * speed) / speed**3
        normal = np.array([-y1 / speed, x1 / speed, 0.0])
        field_frame = killing_frame_array(problem.field, 0.0 if x is None else x, y)
        row.update(x=x, y=y, phi=phi, H=h, residual=h - float(normal @ field_frame))
        return row

    if key[1] == "dtheta":
        y, theta, phi = u
        y1, th1, dphi = d
        y2 = SQRT2 * (y1 * math.cos(phi) - y * dphi * math.sin(phi))
        th2 = dphi * math.cos(phi)
    elif key[1] == "dx":
        y, y1, theta = u
        th1, y2, th2 = 1.0, -2.0 * y, 0.0
        phi = math.atan2(th1, y1 / (SQRT2 * y))
    else:
        y, f, theta = u
        y1, th1, th2 = f * y, 1.0, 0.0
        y2 = y * (d[1] + f * f)
        phi = math.atan2(th1, y1 / (SQRT2 * y))
    speed = math.hypot(y1, SQRT2 * y * th1)
    h = SQRT2 * y * y * (th1 * y2 - y1 * th2 + 2.0 * y * th1**3) / speed**3
    normal = np.array([y1 / (SQRT2 * speed), SQRT2 * y * th1 / speed, -y1 / (SQRT2 * speed)])
    # the fiber coordinate x only enters V and W; report the residual on x = 0
    field_frame = killing_frame_array(problem.field, 0.0, y)
    row.update(y=y, theta=theta, phi=phi, H=h, residual=h - float(normal @ field_frame))
    return row


# ============================================================================
# EXPLICIT SOLUTIONS
# ============================================================================

class SolutionTag(str, Enum):
    NX_MINIMAL = "nx-minimal"
    NTHETA_CMC = "ntheta-cmc"
    NTHETA_GENERAL = "ntheta-general"
    NV = "nv"
    ROT_LINE_H = "rot-line-h"
    ROT_LINE_V = "rot-line-v"
    ROT_LINE_SLANT = "rot-line-slant"
    ROT_CMC = "rot-cmc"

    @classmethod
    def parse(cls, name: str) -> "SolutionTag":
        key = name.strip().lower().replace("_", "-")
        if key in ("rot-cmc-sub", "rot-cmc-one", "rot-cmc-super"):
            return cls.ROT_CMC
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown solution {name!r}") from None


@dataclass(frozen=True)
class ExplicitSolution:
    """
    Closed-form generating curve of a translator (or CMC) family

    `ode_residual(s)` evaluates the defining reduction identities with the
    analytic derivatives; `phi` is set for angle-form solutions.
    """

    tag: SolutionTag
    family: Family
    parameters: Dict[str, float]
    curve: GeneratingCurve
    ode_residual: Callable[[np.ndarray], np.ndarray]
    problems: Tuple[TranslatorProblem, ...] = ()
    mean_curvature: Optional[float] = None
    n_dot_w: Optional[Callable[[object], object]] = None

    @property
    def interval(self) -> Tuple[float, float]:
        return self.curve.interval

    def surface(self, orientation: int = 1) -> InvariantSurface:
        return InvariantSurface(self.family, self.curve, orientation)

    def samples(self, n: int = 200, margin: float = 0.02) -> np.ndarray:
        return self.curve.samples(n, margin, default=(-2.0, 2.0))

    def max_ode_residual(self, n: int = 400, margin: float = 0.02) -> float:
        return float(np.max(np.abs(self.ode_residual(self.samples(n, margin)))))


def _angle_identity_k(curve: GeneratingCurve, phi: Callable, dphi_expected: Callable) -> Callable:
    """x' - 2y cos(phi), y' - 2y sin(phi) and a prescribed phi' for K-family curves"""

    def check(s):
        c = curve.evaluate(s)
        ph = phi(s)
        return np.array([
            c[0, 1] - 2.0 * c[1, 0] * np.cos(ph),
            c[1, 1] - 2.0 * c[1, 0] * np.sin(ph),
            _dphi_fd(phi, s) - dphi_expected(s, ph, c),
        ])

    return check


def _wrap(angle):
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def _dphi_fd(phi: Callable, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    h = 1e-4
    # five-point stencil on wrapped angle differences
    near = _wrap(phi(s + h) - phi(s - h))
    far = _wrap(phi(s + 2 * h) - phi(s - 2 * h))
    return (8.0 * near - far) / (12 * h)


def _nx_minimal(c1: float = 1.0, c2: float = 0.0) -> ExplicitSolution:
    r = math.hypot(c1, c2)
    if r == 0.0:
        raise DomainError("nx-minimal needs (c1, c2) != (0, 0)")
    delta = math.atan2(c2, c1)
    interval = ((delta - math.pi / 2) / SQRT2, (delta + math.pi / 2) / SQRT2)

    def jet(s):
        w = SQRT2 * np.asarray(s, dtype=float) - delta
        return stack_jet(r * np.cos(w), -SQRT2 * r * np.sin(w), -2.0 * r * np.cos(w), s, 1.0, 0.0)

    curve = GeneratingCurve(Family.N, jet, interval, name="nx-minimal")

    def ode(s):
        c = curve.evaluate(s)
        return np.array([c[0, 2] + 2.0 * c[0, 0], c[1, 1] - 1.0])

    return ExplicitSolution(SolutionTag.NX_MINIMAL, Family.N, {"c1": c1, "c2": c2}, curve, ode,
                            (TranslatorProblem(Family.N, KillingFieldKind.DX),), mean_curvature=0.0)


def _n_angle_identity(curve: GeneratingCurve, phi: Callable, dphi: Callable) -> Callable:
    def check(s):
        c = curve.evaluate(s)
        ph = phi(s)
        return np.array([
            c[0, 1] - SQRT2 * c[0, 0] * np.cos(ph),
            c[1, 1] - np.sin(ph),
            dphi(s) - (np.cos(ph) + SQRT2 * np.sin(ph)),
        ])

    return check


def _ntheta_cmc(c1: float = 1.0, c2: float = 0.0) -> ExplicitSolution:
    require_positive_y(c1)
    rate = 2.0 / SQRT3

    def jet(s):
        s = np.asarray(s, dtype=float)
        y = c1 * np.exp(rate * s)
        return stack_jet(y, rate * y, rate * rate * y, -s / SQRT3 + c2, -1.0 / SQRT3, 0.0)

    phi0 = -math.atan(1.0 / SQRT2)
    phi = lambda s: phi0 + 0.0 * np.asarray(s, dtype=float)
    curve = GeneratingCurve(Family.N, jet, phi=phi, name="ntheta-cmc")
    return ExplicitSolution(SolutionTag.NTHETA_CMC, Family.N, {"c1": c1, "c2": c2}, curve,
                            _n_angle_identity(curve, phi, lambda s: 0.0 * np.asarray(s, dtype=float)),
                            (TranslatorProblem(Family.N, KillingFieldKind.DTHETA),),
                            mean_curvature=-1.0 / SQRT3)


def ntheta_phi(s):
    """arctan(sqrt2) + 2 arctan(tanh(sqrt3 s / 2))"""
    return math.atan(SQRT2) + 2.0 * np.arctan(np.tanh(SQRT3 * np.asarray(s, dtype=float) / 2.0))


def ntheta_dphi(s):
    return SQRT3 / np.cosh(SQRT3 * np.asarray(s, dtype=float))


PSI_VARIANTS: Dict[str, Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]] = {
    "-log cosh(sqrt3 s)": lambda s: (-np.log(np.cosh(SQRT3 * s)), -SQRT3 * np.tanh(SQRT3 * s),
                                     -3.0 / np.cosh(SQRT3 * s) ** 2),
    "log cosh(sqrt3)": lambda s: (math.log(math.cosh(SQRT3)) + 0.0 * s, 0.0 * s, 0.0 * s),
    "+log cosh(sqrt3 s)": lambda s: (np.log(np.cosh(SQRT3 * s)), SQRT3 * np.tanh(SQRT3 * s),
                                     3.0 / np.cosh(SQRT3 * s) ** 2),
}
CERTIFIED_PSI = "-log cosh(sqrt3 s)"


def _ntheta_general(c1: float = 1.0, c2: float = 0.0, psi: str = CERTIFIED_PSI) -> ExplicitSolution:
    """y = c1 exp(2 sqrt2 L / 3 + 2 psi / 3), theta = 2 sqrt2 L / 3 - psi / 3 + c2, L = arctan(tanh(sqrt3 s / 2))"""
    require_positive_y(c1)
    if psi not in PSI_VARIANTS:
        raise DomainError(f"unknown psi variant {psi!r}")
    psi_fn = PSI_VARIANTS[psi]
    k = 2.0 * SQRT2 / 3.0

    def jet(s):
        s = np.asarray(s, dtype=float)
        lam = np.arctan(np.tanh(SQRT3 * s / 2.0))
        lam1 = 0.5 * ntheta_dphi(s)
        lam2 = -1.5 * np.tanh(SQRT3 * s) / np.cosh(SQRT3 * s)
        p, p1, p2 = psi_fn(s)
        g1 = k * lam1 + 2.0 * p1 / 3.0
        g2 = k * lam2 + 2.0 * p2 / 3.0
        y = c1 * np.exp(k * lam + 2.0 * p / 3.0)
        return stack_jet(y, g1 * y, (g2 + g1 * g1) * y,
                         k * lam - p / 3.0 + c2, k * lam1 - p1 / 3.0, k * lam2 - p2 / 3.0)

    curve = GeneratingCurve(Family.N, jet, phi=ntheta_phi, name=f"ntheta-general[{psi}]")
    return ExplicitSolution(SolutionTag.NTHETA_GENERAL, Family.N, {"c1": c1, "c2": c2}, curve,
                            _n_angle_identity(curve, ntheta_phi, ntheta_dphi),
                            (TranslatorProblem(Family.N, KillingFieldKind.DTHETA),))


def _nv(c: float = 1.0, s0: float = 0.0) -> ExplicitSolution:
    require_positive_y(c)
    half = math.pi / SQRT2
    interval = (s0 - half * (1.0 - 1e-9), s0 + half * (1.0 - 1e-9))

    def jet(s):
        w = SQRT2 * (np.asarray(s, dtype=float) - s0)
        return stack_jet(c * (1.0 + np.cos(w)), -SQRT2 * c * np.sin(w), -2.0 * c * np.cos(w), s, 1.0, 0.0)

    curve = GeneratingCurve(Family.N, jet, interval, name="nv")

    def ode(s):
        v = curve.evaluate(s)
        y, y1, y2 = v[0]
        return np.array([y1 * y1 - 2.0 * y * (y2 + y), v[1, 1] - 1.0])

    return ExplicitSolution(SolutionTag.NV, Family.N, {"c": c, "s0": s0}, curve, ode,
                            (TranslatorProblem(Family.N, KillingFieldKind.V),))


def _line(tag: SolutionTag, phi0: float, c1: float, c2: float, problems) -> ExplicitSolution:
    curve = straight_line(phi0, c1, c2)
    curve = GeneratingCurve(Family.K, curve.jet, curve.interval, curve.phi, tag.value)
    ode = _angle_identity_k(curve, curve.phi, lambda s, ph, c: 0.0 * ph)
    params = {"phi0": phi0, "c1": c1, "c2": c2}
    return ExplicitSolution(tag, Family.K, params, curve, ode, problems, mean_curvature=math.cos(phi0))


def rot_cmc_closed_form(H: float, c: float, s) -> Dict[str, np.ndarray]:
    """x, y, cos(phi), sin(phi) and <N, W> of the rotational CMC curve"""
    s = np.asarray(s, dtype=float)
    if H < 1.0:
        k = math.sqrt(1.0 - H * H)
        u = 2.0 * k * s
        d = np.cosh(u) + H
        return {"x": c * k * np.sinh(u) / d, "y": c * k * k / d,
                "cos": (1.0 + H * np.cosh(u)) / d, "sin": -k * np.sinh(u) / d,
                "n_dot_w": 0.25 * c * k * np.sinh(u)}
    if H == 1.0:
        d = 1.0 + 4.0 * s * s
        return {"x": -2.0 * c * s / d, "y": c / d,
                "cos": -(1.0 - 4.0 * s * s) / d, "sin": -4.0 * s / d,
                "n_dot_w": 0.0 * s}
    k = math.sqrt(H * H - 1.0)
    u = 2.0 * k * s
    d = H + np.cos(u)
    return {"x": c * k * np.sin(u) / d, "y": c * k * k / d,
            "cos": (1.0 + H * np.cos(u)) / d, "sin": k * np.sin(u) / d,
            "n_dot_w": 0.25 * c * k * np.sin(u)}


def _rot_cmc(H: float = 0.5, c: float = 1.0) -> ExplicitSolution:
    if H < 0.0:
        raise DomainError(f"rot-cmc needs H >= 0, got {H}")
    require_positive_y(c)
    interval = (-math.inf, math.inf)
    if H > 1.0:
        half = math.pi / (2.0 * math.sqrt(H * H - 1.0))
        interval = (-half * (1.0 - 1e-9), half * (1.0 - 1e-9))

    def phi(s):
        f = rot_cmc_closed_form(H, c, s)
        return np.arctan2(f["sin"], f["cos"])

    def jet(s):
        f = rot_cmc_closed_form(H, c, s)
        y, cs, sn = f["y"], f["cos"], f["sin"]
        dphi = 2.0 * H - 2.0 * cs
        x1, y1 = 2.0 * y * cs, 2.0 * y * sn
        return stack_jet(f["x"], x1, 2.0 * y1 * cs - 2.0 * y * dphi * sn,
                         y, y1, 2.0 * y1 * sn + 2.0 * y * dphi * cs)

    curve = GeneratingCurve(Family.K, jet, interval, phi, f"rot-cmc(H={H:g})")
    ode = _angle_identity_k(curve, phi, lambda s, ph, cj: 2.0 * H - 2.0 * np.cos(ph))
    return ExplicitSolution(SolutionTag.ROT_CMC, Family.K, {"H": H, "c": c}, curve, ode,
                            (TranslatorProblem(Family.K, KillingFieldKind.W),), mean_curvature=H,
                            n_dot_w=lambda s: rot_cmc_closed_form(H, c, s)["n_dot_w"])


def explicit_solution(tag, **params) -> ExplicitSolution:
    """Build an explicit solution by tag; unknown parameters are rejected"""
    tag = SolutionTag.parse(tag) if isinstance(tag, str) else SolutionTag(tag)
    params = {k: float(v) for k, v in params.items()}
    k_dtheta = TranslatorProblem(Family.K, KillingFieldKind.DTHETA)
    k_v = TranslatorProblem(Family.K, KillingFieldKind.V)
    builders = {
        SolutionTag.NX_MINIMAL: (_nx_minimal, ("c1", "c2")),
        SolutionTag.NTHETA_CMC: (_ntheta_cmc, ("c1", "c2")),
        SolutionTag.NTHETA_GENERAL: (_ntheta_general, ("c1", "c2")),
        SolutionTag.NV: (_nv, ("c", "s0")),
        SolutionTag.ROT_CMC: (_rot_cmc, ("H", "c")),
        SolutionTag.ROT_LINE_H: (lambda c1=0.0, c2=1.0: _line(tag, 0.0, c1, c2, ()), ("c1", "c2")),
        SolutionTag.ROT_LINE_V: (lambda c1=0.0, c2=1.0: _line(tag, math.pi / 2, c1, c2, (k_dtheta, k_v)),
                                 ("c1", "c2")),
        SolutionTag.ROT_LINE_SLANT: (lambda phi0=math.pi / 4, c1=0.0, c2=1.0: _slant(phi0, c1, c2),
                                     ("phi0", "c1", "c2")),
    }
    builder, allowed = builders[tag]
    unknown = set(params) - set(allowed)
    if unknown:
        raise DomainError(f"{tag.value}: unknown parameters {sorted(unknown)}; allowed {list(allowed)}")
    return builder(**params)


def _slant(phi0: float, c1: float, c2: float) -> ExplicitSolution:
    if abs(math.sin(phi0)) < 1e-12:
        raise DomainError("rot-line-slant needs sin(phi0) != 0")
    # H = cos(phi0) and <N, dtheta> = 0, so only the minimal line is a dtheta-translator
    problems = (TranslatorProblem(Family.K, KillingFieldKind.DTHETA),) if abs(math.cos(phi0)) < 1e-12 else ()
    return _line(SolutionTag.ROT_LINE_SLANT, phi0, c1, c2, problems)


def verify_solution(sol: ExplicitSolution, problem: TranslatorProblem, grid: Optional[ResidualGrid] = None,
                    jets: str = "analytic") -> ResidualReport:
    if sol.family is not problem.family:
        raise DomainError(f"{sol.tag.value} is {sol.family.value}-invariant, problem is {problem.label}")
    return verify_surface(problem, sol.surface(problem.orientation), grid, sol.tag.value, jets)


def solution_normal_residual(sol: ExplicitSolution, s: float, t: float) -> float:
    """Oracle normal against the analytic jet; a sanity check on the solution's derivatives"""
    surface = sol.surface()
    return normal_residuals(jet_analytic(surface, s, t), oracle_forms(surface, s, t))


# ============================================================================
# CONSISTENCY CHECKS
# ============================================================================

@dataclass(frozen=True)
class PsiVariantResult:
    variant: str
    sup_error: float
    matches: bool


def ntheta_psi_variants(c1: float = 1.0, c2: float = 0.0, s_max: float = 3.0, n: int = 121,
                        match_tol: float = 1e-6) -> List[PsiVariantResult]:
    """
    Compare each psi variant of the general dtheta solution with direct integration

    Each variant seeds y' = sqrt2 y cos(phi), theta' = sin(phi) with its own
    value at s = 0 and is integrated to both ends of [-s_max, s_max].
    """
    config = IntegratorConfig(rtol=1e-11, atol=1e-13)
    s_grid = np.linspace(-s_max, s_max, n)
    system = OdeSystem(
        name="N-angle-form",
        dimension=2,
        rhs=lambda s, u: np.array([SQRT2 * u[0] * math.cos(float(ntheta_phi(s))), math.sin(float(ntheta_phi(s)))]),
        domain=lambda u: u[0] > 0.0,
        state_names=("y", "theta"),
    )
    results = []
    for name in PSI_VARIANTS:
        sol = _ntheta_general(c1, c2, name)
        start = sol.curve.evaluate(0.0)[:, 0]
        forward = integrate(system, start, (0.0, s_max), config)
        backward = integrate(system, start, (0.0, -s_max), config)
        left, right = s_grid[s_grid < 0.0], s_grid[s_grid >= 0.0]
        numeric = np.vstack([backward.dense(left), forward.dense(right)])
        closed = sol.curve.evaluate(s_grid)[:, 0, :].T
        err = float(np.max(np.abs(numeric - closed)))
        results.append(PsiVariantResult(name, err, err < match_tol))
        logger.info(f"psi variant {name}: sup error {err:.3e}")
    return results


@dataclass(frozen=True)
class CmcConsistency:
    H: float
    consistent: bool
    score: float
    best_phi0: float
    algebraic_residual: float
    scores: Dict[float, float]


CMC_PHI_SAMPLES = (math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2, 3 * math.pi / 4, -3 * math.pi / 4)


def cmc_consistency_check(H: float, phi0: Optional[float] = None, s_max: float = 4.0,
                          tol: Optional[float] = None) -> CmcConsistency:
    """
    Whether a constant-H rotational curve can also solve the (K, V) reduction

    Integrates x' = 2y cos(phi), y' = 2y sin(phi), phi' = 2(H - cos(phi))
    from y = 1 with x chosen so the two phi' expressions agree at s = 0,
    then measures sup |2H - cos(phi) + (x/y) sin(phi)| over [0, s_max].
    H is consistent if some sampled starting angle keeps the mismatch
    below tolerance.
    """
    if H < 0.0:
        raise DomainError(f"cmc_consistency_check needs H >= 0, got {H}")
    tol = settings.consistency_tol if tol is None else tol
    system = OdeSystem(
        name="K-cmc",
        dimension=3,
        rhs=lambda s, u: np.array([2.0 * u[1] * math.cos(u[2]), 2.0 * u[1] * math.sin(u[2]),
                                   2.0 * (H - math.cos(u[2]))]),
        domain=lambda u: u[1] > 0.0,
        events=(Event("y floor", lambda s, u: u[1] - settings.y_floor),),
        state_names=("x", "y", "phi"),
    )
    scores = {}
    for start in ((phi0,) if phi0 is not None else CMC_PHI_SAMPLES):
        sn = math.sin(start)
        x0 = (math.cos(start) - 2.0 * H) / sn if abs(sn) > 1e-12 else 0.0
        traj = integrate(system, [x0, 1.0, start], (0.0, s_max))
        x, y, phi = traj.states.T
        mismatch = 2.0 * H - np.cos(phi) + (x / y) * np.sin(phi)
        scores[start] = float(np.max(np.abs(mismatch)))
    best = min(scores, key=scores.get)
    algebraic = abs(3.0 * H - (1.0 + 2.0 * H * H) * math.cos(best))
    return CmcConsistency(H, scores[best] < tol, scores[best], best, algebraic, scores)


@dataclass(frozen=True)
class BigraphCertificate:
    """x-turning points of a (K, dx) curve and whether x is monotone on two arcs"""

    turning_points: Tuple[float, ...]
    s_range: Tuple[float, float]
    holds: bool


def bigraph_certificate(initial_state: Sequence[float] = (0.0, 1.0, 0.0), s_max: float = 20.0) -> BigraphCertificate:
    problem = TranslatorProblem(Family.K, KillingFieldKind.DX)
    forward = solve_reduction(problem, initial_state, (0.0, s_max))
    backward = solve_reduction(problem, initial_state, (0.0, -s_max))
    s = np.concatenate([backward.s[::-1], forward.s[1:]])
    states = np.vstack([backward.states[::-1], forward.states[1:]])
    dx = 2.0 * states[:, 1] * np.cos(states[:, 2])
    signs = np.sign(dx)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    turning = tuple(float(0.5 * (s[i] + s[i + 1])) for i in flips)
    return BigraphCertificate(turning, (float(s[0]), float(s[-1])), len(turning) == 1)


def verdict_summary(report: ResidualReport) -> str:
    if not report.consistent:
        return "inconsistent"
    if report.certified:
        return "translator"
    return "not a translator" if report.refutes() else "undecided"


__all__ = [
    "TranslatorProblem", "ResidualGrid", "ResidualReport", "SolutionTag", "ExplicitSolution",
    "residual", "residual_oracle", "residual_arrays", "verify_surface", "verify_solution",
    "a_family_poly_coeffs", "a_family_poly_gap", "reduction_rhs", "reduction_system", "solve_reduction",
    "row_columns", "explicit_solution", "ntheta_psi_variants", "cmc_consistency_check",
    "bigraph_certificate", "rot_cmc_closed_form",
]
