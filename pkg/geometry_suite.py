"""
Geometry suites - frame, metric, NAK chart, connection and Killing fields
"""
import logging
import math
from typing import List, Tuple

import numpy as np

from base_suite import BaseSuite
from config import settings
from sl2r_core import (
    CONNECTION_TABLE,
    KillingFieldKind,
    Sl2Matrix,
    Sl2Point,
    christoffels_at,
    christoffels_fd,
    compose_nak,
    connection_from_christoffels,
    decompose_nak,
    frame_matrix,
    hyperbolic_projection,
    inverse_metric_at,
    killing_equation_residual,
    metric_at,
    metric_compatibility_fd,
    mobius_action,
    torsion_residual,
)

logger = logging.getLogger(__name__)

# frame and metric identities are checked across six decades of y
WIDE_Y_RANGE = (1e-3, 1e3)


def random_points(rng: np.random.Generator, n: int, y_range: Tuple[float, float] = (0.2, 3.0),
                  log_y: bool = False) -> List[Sl2Point]:
    """Points with x in [-3, 3], theta in [-pi, pi] and y in y_range, log-uniform if log_y"""
    xs = rng.uniform(-3.0, 3.0, n)
    if log_y:
        ys = 10.0 ** rng.uniform(math.log10(y_range[0]), math.log10(y_range[1]), n)
    else:
        ys = rng.uniform(y_range[0], y_range[1], n)
    ts = rng.uniform(-math.pi, math.pi, n)
    return [Sl2Point(float(x), float(y), float(t)) for x, y, t in zip(xs, ys, ts)]


def random_sl2_matrices(rng: np.random.Generator, n: int) -> List[Sl2Matrix]:
    matrices = []
    for _ in range(n):
        a = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0))
        b, c = (float(v) for v in rng.uniform(-2.0, 2.0, 2))
        matrices.append(Sl2Matrix(a, b, c, (1.0 + b * c) / a, tol=1e-9))
    return matrices


class FrameMetricSuite(BaseSuite):
    """Orthonormal frame, metric inverse/determinant and the NAK chart"""

    def __init__(self):
        super().__init__("frame-metric")
        self.samples = self.config.get("samples", 1000)

    def run(self) -> None:
        rng = np.random.default_rng(settings.random_seed)
        points = random_points(rng, self.samples, WIDE_Y_RANGE, log_y=True)

        def gram_deviation():
            return max(
                np.max(np.abs(frame_matrix(p).T @ metric_at(p) @ frame_matrix(p) - np.eye(3)))
                for p in points
            )

        def inverse_deviation():
            # entries of g g^-1 are sums of terms of size max(1, 1/y)
            return max(np.max(np.abs(metric_at(p) @ inverse_metric_at(p) - np.eye(3))) * min(1.0, p.y) for p in points)

        def smallest_minor():
            # leading minors relative to their closed forms 1/(2y^2), 1/(8y^4), 1/(16y^4)
            worst = math.inf
            for p in points:
                g = metric_at(p)
                minors = (g[0, 0] * 2.0 * p.y**2, np.linalg.det(g[:2, :2]) * 8.0 * p.y**4, np.linalg.det(g) * 16.0 * p.y**4)
                worst = min(worst, *minors)
            return float(worst)

        def determinant_deviation():
            # det g = 1 / (16 y^4)
            return max(abs(np.linalg.det(metric_at(p)) * 16.0 * p.y**4 - 1.0) for p in points)

        self.check("frame Gram matrix is the identity", gram_deviation, 1e-12)
        self.check("inverse metric", inverse_deviation, 1e-12)
        self.check("metric determinant 1/(16 y^4)", determinant_deviation, 1e-10)
        self.check("metric positive definite (scaled leading minors)", smallest_minor, 1.0 - 1e-10, comparison=">")

        matrices = random_sl2_matrices(rng, self.samples)

        def matrix_round_trip():
            return max(
                np.max(np.abs(compose_nak(decompose_nak(m)).as_array() - m.as_array())) for m in matrices
            )

        def point_round_trip():
            worst = 0.0
            for p in points:
                q = decompose_nak(compose_nak(p))
                dtheta = math.remainder(q.theta - p.theta, 2.0 * math.pi)
                worst = max(worst, abs(q.x - p.x), abs(q.y - p.y) / p.y, abs(dtheta))
            return worst

        def mobius_projection():
            # n(x) a(y) k(theta) maps i to x + i y
            worst = 0.0
            for m in matrices:
                x, y = hyperbolic_projection(decompose_nak(m))
                worst = max(worst, abs(mobius_action(m, 1j) - complex(x, y)) / max(1.0, abs(complex(x, y))))
            return worst

        self.check("decompose/compose round trip", matrix_round_trip, 1e-10)
        self.check("compose/decompose round trip", point_round_trip, 1e-10)
        self.check("projection is the Mobius image of i", mobius_projection, 1e-12)


class ConnectionSuite(BaseSuite):
    """Levi-Civita connection table against the Christoffel contraction"""

    def __init__(self):
        super().__init__("connection")
        self.samples = self.config.get("samples", 50)

    def run(self) -> None:
        rng = np.random.default_rng(settings.random_seed + 1)
        points = random_points(rng, self.samples)
        pairs = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]

        def table_deviation():
            return max(
                np.max(np.abs(connection_from_christoffels(p, i, j).as_array() - CONNECTION_TABLE[i - 1, j - 1]))
                for p in points for i, j in pairs
            )

        def christoffel_fd_deviation():
            return max(
                np.max(np.abs(christoffels_fd(p) - christoffels_at(p))) * p.y for p in points
            )

        self.check("connection table, all 27 entries", table_deviation, 1e-9)
        self.check("Christoffel symbols vs finite differences", christoffel_fd_deviation, 1e-5)
        self.check("metric compatibility", lambda: max(metric_compatibility_fd(p) * p.y**3 for p in points), 1e-5)
        self.check(
            "torsion free",
            lambda: max(torsion_residual(p, i, j) for p in points for i, j in pairs if i < j),
            1e-5,
        )


class KillingSuite(BaseSuite):
    """Finite-difference Killing equation for the four basis fields"""

    def __init__(self):
        super().__init__("killing")
        self.samples = self.config.get("samples", 200)

    def run(self) -> None:
        rng = np.random.default_rng(settings.random_seed + 2)
        points = random_points(rng, self.samples)
        vectors = rng.normal(size=(self.samples, 2, 3))
        for kind in KillingFieldKind:
            self.check(
                f"Killing equation for {kind.value}",
                lambda kind=kind: max(
                    abs(killing_equation_residual(kind, p, uv[0], uv[1])) for p, uv in zip(points, vectors)
                ),
                1e-5,
            )
