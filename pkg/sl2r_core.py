"""
Ambient geometry of SL(2,R) with its canonical left-invariant metric

NAK coordinates (x, y, theta) with A = n(x) a(y) k(theta), the metric in
those coordinates, the orthonormal frame e1 = 2y dx - dtheta, e2 = 2y dy,
e3 = dtheta, the Levi-Civita connection and the four basis Killing fields.
All values are immutable and every function is pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Tuple
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

DET_TOL = 1e-12
PARABOLIC_TOL = 1e-12
TWO_PI = 2.0 * math.pi


# ============================================================================
# ERRORS
# ============================================================================

class Sl2rError(Exception):
    """Base class for every error raised by the lab"""


class DomainError(Sl2rError, ValueError):
    """A point or parameter lies outside the domain of an operation"""


class DeterminantError(DomainError):
    """A matrix is not in SL(2,R) within tolerance"""


class RegularityError(Sl2rError):
    """A generating curve has vanishing speed"""


class DegenerateJetError(Sl2rError):
    """The first fundamental form of a surface jet is (numerically) singular"""


class IntegratorError(Sl2rError):
    """An ODE integration could not proceed"""


def require_positive_y(y: float) -> None:
    if not y > 0.0:
        raise DomainError(f"y must be positive, got {y!r}")


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class Sl2Point:
    """Global NAK coordinates of a point of SL(2,R); theta is an unconstrained real"""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        require_positive_y(self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @classmethod
    def from_array(cls, values) -> "Sl2Point":
        x, y, theta = (float(v) for v in values)
        return cls(x, y, theta)


@dataclass(frozen=True)
class Sl2Matrix:
    """2x2 real matrix with determinant 1, validated at construction"""

    a: float
    b: float
    c: float
    d: float
    tol: float = field(default=DET_TOL, compare=False, repr=False)

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(1.0, abs(self.a * self.d), abs(self.b * self.c))
        if not abs(det - 1.0) <= self.tol * scale:
            raise DeterminantError(f"determinant {det!r} differs from 1 by more than {self.tol:g}")

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @classmethod
    def from_array(cls, m, tol: float = DET_TOL) -> "Sl2Matrix":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]), tol=tol)


class _Vector3:
    """Shared arithmetic for three-component vectors"""

    def as_array(self) -> np.ndarray:
        return np.array(tuple(self), dtype=float)

    def __iter__(self):
        raise NotImplementedError

    def __add__(self, other):
        return type(self).from_array(self.as_array() + other.as_array())

    def __sub__(self, other):
        return type(self).from_array(self.as_array() - other.as_array())

    def __mul__(self, scalar: float):
        return type(self).from_array(self.as_array() * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self).from_array(-self.as_array())


@dataclass(frozen=True)
class FrameVector(_Vector3):
    """Components with respect to the orthonormal frame {e1, e2, e3}"""

    v1: float
    v2: float
    v3: float

    def __iter__(self):
        return iter((self.v1, self.v2, self.v3))

    @classmethod
    def from_array(cls, values) -> "FrameVector":
        v1, v2, v3 = (float(v) for v in values)
        return cls(v1, v2, v3)

    def dot(self, other: "FrameVector") -> float:
        return self.v1 * other.v1 + self.v2 * other.v2 + self.v3 * other.v3

    def norm(self) -> float:
        return math.sqrt(self.dot(self))


@dataclass(frozen=True)
class CoordVector(_Vector3):
    """Components with respect to the coordinate basis {dx, dy, dtheta}"""

    vx: float
    vy: float
    vtheta: float

    def __iter__(self):
        return iter((self.vx, self.vy, self.vtheta))

    @classmethod
    def from_array(cls, values) -> "CoordVector":
        vx, vy, vtheta = (float(v) for v in values)
        return cls(vx, vy, vtheta)


class KillingFieldKind(str, Enum):
    """The four basis Killing fields: dx, dtheta, x dx + y dy, (x^2 - y^2)/2 dx + x y dy"""

    DX = "dx"
    DTHETA = "dtheta"
    V = "v"
    W = "w"

    @classmethod
    def parse(cls, name: str) -> "KillingFieldKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"unknown Killing field {name!r}; expected one of dx, dtheta, v, w") from None


class MatrixClass(str, Enum):
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"
    ELLIPTIC = "Elliptic"


# ============================================================================
# NAK CHART
# ============================================================================

def compose_nak(p: Sl2Point) -> Sl2Matrix:
    """n(x) a(y) k(theta)"""
    require_positive_y(p.y)
    sy = math.sqrt(p.y)
    ct, st = math.cos(p.theta), math.sin(p.theta)
    a = sy * ct - (p.x / sy) * st
    b = sy * st + (p.x / sy) * ct
    c = -st / sy
    d = ct / sy
    # the product is unimodular by construction; only round-off is checked
    return Sl2Matrix(a, b, c, d, tol=1e-9)


def decompose_nak(m: Sl2Matrix) -> Sl2Point:
    """Unique NAK factorization; theta is returned in (-pi, pi]"""
    r2 = m.c * m.c + m.d * m.d
    y = 1.0 / r2
    x = (m.a * m.c + m.b * m.d) / r2
    sy = math.sqrt(y)
    # 0.0 - c keeps a signed zero from producing theta = -pi or -0
    theta = math.atan2(0.0 - m.c * sy, m.d * sy)
    return Sl2Point(x, y, theta)


def classify_matrix(m: Sl2Matrix) -> MatrixClass:
    """Parabolic, hyperbolic or elliptic by the absolute value of the trace"""
    tr = abs(m.trace)
    if math.isclose(tr, 2.0, rel_tol=0.0, abs_tol=PARABOLIC_TOL):
        return MatrixClass.PARABOLIC
    if tr > 2.0:
        return MatrixClass.HYPERBOLIC
    return MatrixClass.ELLIPTIC


def mobius_action(m: Sl2Matrix, z: complex) -> complex:
    """Linear fractional action on the upper half-plane"""
    z = complex(z)
    if not z.imag > 0.0:
        raise DomainError(f"point {z!r} is not in the upper half-plane")
    return (m.a * z + m.b) / (m.c * z + m.d)


def hyperbolic_projection(p: Sl2Point) -> Tuple[float, float]:
    """Fiber projection (x, y, theta) -> (x, y) onto H^2(-4)"""
    return (p.x, p.y)


# ============================================================================
# METRIC, FRAME, CONNECTION
# ============================================================================

def metric_at(p: Sl2Point) -> np.ndarray:
    """Metric in the coordinate basis, order (x, y, theta)"""
    y = p.y
    require_positive_y(y)
    return np.array([
        [1.0 / (2.0 * y * y), 0.0, 1.0 / (2.0 * y)],
        [0.0, 1.0 / (4.0 * y * y), 0.0],
        [1.0 / (2.0 * y), 0.0, 1.0],
    ])


def inverse_metric_at(p: Sl2Point) -> np.ndarray:
    y = p.y
    require_positive_y(y)
    return np.array([
        [4.0 * y * y, 0.0, -2.0 * y],
        [0.0, 4.0 * y * y, 0.0],
        [-2.0 * y, 0.0, 2.0],
    ])


def metric_derivatives_at(p: Sl2Point) -> np.ndarray:
    """dg[a, i, j] = partial_a g_ij; only the y-derivatives are nonzero"""
    y = p.y
    require_positive_y(y)
    dg = np.zeros((3, 3, 3))
    dg[1, 0, 0] = -1.0 / y**3
    dg[1, 1, 1] = -1.0 / (2.0 * y**3)
    dg[1, 0, 2] = dg[1, 2, 0] = -1.0 / (2.0 * y * y)
    return dg


def inner(p: Sl2Point, u: CoordVector, v: CoordVector) -> float:
    return float(u.as_array() @ metric_at(p) @ v.as_array())


def frame_matrix(p: Sl2Point) -> np.ndarray:
    """Columns are e1, e2, e3 in coordinate components"""
    y = p.y
    require_positive_y(y)
    return np.array([
        [2.0 * y, 0.0, 0.0],
        [0.0, 2.0 * y, 0.0],
        [-1.0, 0.0, 1.0],
    ])


def frame_at(p: Sl2Point) -> Tuple[CoordVector, CoordVector, CoordVector]:
    f = frame_matrix(p)
    return tuple(CoordVector.from_array(f[:, j]) for j in range(3))


def frame_jacobians(p: Sl2Point) -> np.ndarray:
    """J[j, k, a] = partial_a (e_j)^k"""
    require_positive_y(p.y)
    jac = np.zeros((3, 3, 3))
    jac[0, 0, 1] = 2.0
    jac[1, 1, 1] = 2.0
    return jac


def coord_to_frame_array(y: float, v: np.ndarray) -> np.ndarray:
    """Array form of coord_to_frame; v may carry extra trailing axes"""
    w1 = v[0] / (2.0 * y)
    return np.array([w1, v[1] / (2.0 * y), v[2] + w1])


def frame_to_coord_array(y: float, w: np.ndarray) -> np.ndarray:
    return np.array([2.0 * y * w[0], 2.0 * y * w[1], w[2] - w[0]])


def coord_to_frame(p: Sl2Point, v: CoordVector) -> FrameVector:
    require_positive_y(p.y)
    return FrameVector.from_array(coord_to_frame_array(p.y, v.as_array()))


def frame_to_coord(p: Sl2Point, w: FrameVector) -> CoordVector:
    require_positive_y(p.y)
    return CoordVector.from_array(frame_to_coord_array(p.y, w.as_array()))


# nabla_{e_i} e_j in frame components, zero-based [i][j]
CONNECTION_TABLE = np.array([
    [[0.0, 2.0, 0.0], [-2.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
    [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
    [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
])


def connection_frame(i: int, j: int) -> FrameVector:
    """nabla_{e_i} e_j for i, j in {1, 2, 3}"""
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise DomainError(f"frame indices must be 1, 2 or 3, got ({i}, {j})")
    return FrameVector.from_array(CONNECTION_TABLE[i - 1, j - 1])


def _christoffels_from(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # T[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    t = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, t)


def christoffels_at(p: Sl2Point) -> np.ndarray:
    """Gamma[k, i, j] in the coordinate basis, from the analytic metric derivatives"""
    return _christoffels_from(inverse_metric_at(p), metric_derivatives_at(p))


def metric_derivatives_fd(p: Sl2Point, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of metric_at along each coordinate"""
    base = p.as_array()
    step = h * p.y
    dg = np.empty((3, 3, 3))
    for a in range(3):
        offset = np.zeros(3)
        offset[a] = step
        plus = metric_at(Sl2Point.from_array(base + offset))
        minus = metric_at(Sl2Point.from_array(base - offset))
        dg[a] = (plus - minus) / (2.0 * step)
    return dg


def christoffels_fd(p: Sl2Point, h: float = 1e-5) -> np.ndarray:
    """Koszul formula fed with finite-difference metric derivatives"""
    return _christoffels_from(np.linalg.inv(metric_at(p)), metric_derivatives_fd(p, h))


def covariant_derivative(
    p: Sl2Point,
    u: np.ndarray,
    field_value: np.ndarray,
    field_jacobian: np.ndarray,
) -> np.ndarray:
    """nabla_u X in coordinates given X(p) and its coordinate Jacobian dX^k/dx^a"""
    gamma = christoffels_at(p)
    return field_jacobian @ u + np.einsum("kij,i,j->k", gamma, u, field_value)


def connection_from_christoffels(p: Sl2Point, i: int, j: int) -> FrameVector:
    """nabla_{e_i} e_j computed in coordinates and expressed in the frame"""
    f = frame_matrix(p)
    jac = frame_jacobians(p)
    coords = covariant_derivative(p, f[:, i - 1], f[:, j - 1], jac[j - 1])
    return FrameVector.from_array(coord_to_frame_array(p.y, coords))


def _jacobian_fd(func: Callable[[np.ndarray], np.ndarray], base: np.ndarray, h: float) -> np.ndarray:
    jac = np.empty((3, 3))
    for a in range(3):
        offset = np.zeros(3)
        offset[a] = h
        jac[:, a] = (func(base + offset) - func(base - offset)) / (2.0 * h)
    return jac


def frame_lie_bracket_fd(p: Sl2Point, i: int, j: int, h: float = 1e-5) -> FrameVector:
    """[e_i, e_j] from finite differences of the frame coordinate expressions"""
    base = p.as_array()
    step = h * max(1.0, p.y)

    def column(k):
        return lambda q: frame_matrix(Sl2Point.from_array(q))[:, k]

    f = frame_matrix(p)
    jac_i = _jacobian_fd(column(i - 1), base, step)
    jac_j = _jacobian_fd(column(j - 1), base, step)
    bracket = jac_j @ f[:, i - 1] - jac_i @ f[:, j - 1]
    return FrameVector.from_array(coord_to_frame_array(p.y, bracket))


def torsion_residual(p: Sl2Point, i: int, j: int, h: float = 1e-5) -> float:
    """|nabla_{e_i} e_j - nabla_{e_j} e_i - [e_i, e_j]| using the tabulated connection"""
    torsion_free = CONNECTION_TABLE[i - 1, j - 1] - CONNECTION_TABLE[j - 1, i - 1]
    bracket = frame_lie_bracket_fd(p, i, j, h).as_array()
    return float(np.max(np.abs(torsion_free - bracket)))


def metric_compatibility_fd(p: Sl2Point, h: float = 1e-5) -> float:
    """max |d_a g_bc - Gamma^d_ab g_dc - Gamma^d_ac g_bd| with finite-difference d_a g"""
    g = metric_at(p)
    gamma = christoffels_at(p)
    dg = metric_derivatives_fd(p, h)
    expected = np.einsum("dab,dc->abc", gamma, g) + np.einsum("dac,bd->abc", gamma, g)
    return float(np.max(np.abs(dg - expected)))


# ============================================================================
# KILLING FIELDS
# ============================================================================

def killing_at(kind: KillingFieldKind, p: Sl2Point) -> FrameVector:
    """Frame components of a basis Killing field"""
    x, y = p.x, p.y
    require_positive_y(y)
    kind = KillingFieldKind(kind)
    if kind is KillingFieldKind.DX:
        s = 1.0 / (2.0 * y)
        return FrameVector(s, 0.0, s)
    if kind is KillingFieldKind.DTHETA:
        return FrameVector(0.0, 0.0, 1.0)
    if kind is KillingFieldKind.V:
        s = 1.0 / (2.0 * y)
        return FrameVector(s * x, s * y, s * x)
    half = 0.5 * (x * x - y * y)
    s = 1.0 / (2.0 * y)
    return FrameVector(s * half, s * x * y, s * half)


def killing_frame_array(kind: KillingFieldKind, x, y) -> np.ndarray:
    """Vectorized killing_at over arrays of (x, y); rows are frame components"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = 1.0 / (2.0 * y)
    zero = np.zeros_like(x + y)
    if kind is KillingFieldKind.DX:
        return np.array([s + zero, zero, s + zero])
    if kind is KillingFieldKind.DTHETA:
        return np.array([zero, zero, zero + 1.0])
    if kind is KillingFieldKind.V:
        return np.array([s * x, s * y + zero, s * x])
    half = 0.5 * (x * x - y * y)
    return np.array([s * half, s * x * y, s * half])


def killing_coords(kind: KillingFieldKind, q: np.ndarray) -> np.ndarray:
    x, y = q[0], q[1]
    return frame_to_coord_array(y, killing_frame_array(KillingFieldKind(kind), x, y))


def killing_equation_residual(
    kind: KillingFieldKind,
    p: Sl2Point,
    u: np.ndarray,
    v: np.ndarray,
    h: float = 1e-5,
) -> float:
    """<nabla_u X, v> + <u, nabla_v X> with a finite-difference Jacobian of X"""
    base = p.as_array()
    step = h * max(1.0, p.y)
    value = killing_coords(kind, base)
    jac = _jacobian_fd(lambda q: killing_coords(kind, q), base, step)
    g = metric_at(p)
    du = covariant_derivative(p, u, value, jac)
    dv = covariant_derivative(p, v, value, jac)
    return float(du @ g @ v + u @ g @ dv)
