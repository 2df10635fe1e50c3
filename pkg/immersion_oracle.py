"""
Closed-form-free surface geometry for parametrized surfaces in SL(2,R)

Given a second-order jet of (s, t) -> (x, y, theta) the oracle computes the
unit normal, both fundamental forms, the mean curvature (half the trace of
the shape operator) and the intrinsic Gauss curvature of the pullback metric.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional
import logging

import numpy as np

from config import settings
from sl2r_core import (
    CoordVector,
    DegenerateJetError,
    DomainError,
    FrameVector,
    Sl2Point,
    christoffels_at,
    coord_to_frame_array,
    metric_at,
)

logger = logging.getLogger(__name__)

SurfaceEvaluator = Callable[[float, float], Sl2Point]


@dataclass(frozen=True)
class SurfaceJet:
    """Position and first/second derivatives of an immersion at a fixed (s, t)"""

    position: Sl2Point
    d_s: CoordVector
    d_t: CoordVector
    d_ss: CoordVector
    d_st: CoordVector
    d_tt: CoordVector

    def arrays(self):
        return tuple(v.as_array() for v in (self.d_s, self.d_t, self.d_ss, self.d_st, self.d_tt))

    def max_deviation(self, other: "SurfaceJet") -> float:
        """Largest component difference over position and all derivatives"""
        diffs = [np.max(np.abs(self.position.as_array() - other.position.as_array()))]
        diffs += [np.max(np.abs(a - b)) for a, b in zip(self.arrays(), other.arrays())]
        return float(max(diffs))


@dataclass(frozen=True)
class FundamentalForms:
    E: float
    F: float
    G: float
    L: float
    M: float
    Nff: float
    unit_normal: FrameVector

    @property
    def area_density_sq(self) -> float:
        return self.E * self.G - self.F * self.F

    @property
    def mean_curvature(self) -> float:
        return (self.E * self.Nff - 2.0 * self.F * self.M + self.G * self.L) / (2.0 * self.area_density_sq)


def _point(values: np.ndarray) -> Sl2Point:
    try:
        return Sl2Point.from_array(values)
    except DomainError as e:
        raise DomainError(f"finite-difference stencil left the domain: {e}") from None


def jet_finite_difference(evaluate: SurfaceEvaluator, s: float, t: float, h: Optional[float] = None,
                          richardson: Optional[bool] = None) -> SurfaceJet:
    """
    Second-order central differences of an immersion

    Args:
        evaluate: (s, t) -> Sl2Point
        s, t: base point
        h: step; defaults to settings.fd_step scaled by max(1, |s|, |t|)
        richardson: combine steps h and h/2 into a fourth-order jet
            (settings.richardson if omitted)

    Returns:
        SurfaceJet accurate to O(h^2), or O(h^4) with Richardson extrapolation
    """
    if h is None:
        h = settings.fd_step * max(1.0, abs(s), abs(t))
    if not h > 0:
        raise DomainError(f"finite-difference step must be positive, got {h!r}")
    richardson = settings.richardson if richardson is None else richardson

    coarse = _central_differences(evaluate, s, t, h)
    if not richardson:
        return coarse
    fine = _central_differences(evaluate, s, t, h / 2)
    parts = [(4.0 * f - c) / 3.0 for f, c in zip(fine.arrays(), coarse.arrays())]
    return SurfaceJet(coarse.position, *(CoordVector.from_array(p) for p in parts))


def _central_differences(evaluate: SurfaceEvaluator, s: float, t: float, h: float) -> SurfaceJet:
    def at(ds, dt):
        return evaluate(s + ds * h, t + dt * h).as_array()

    center = at(0, 0)
    sp, sm = at(1, 0), at(-1, 0)
    tp, tm = at(0, 1), at(0, -1)
    pp, pm, mp, mm = at(1, 1), at(1, -1), at(-1, 1), at(-1, -1)
    return SurfaceJet(
        position=_point(center),
        d_s=CoordVector.from_array((sp - sm) / (2 * h)),
        d_t=CoordVector.from_array((tp - tm) / (2 * h)),
        d_ss=CoordVector.from_array((sp - 2 * center + sm) / (h * h)),
        d_st=CoordVector.from_array((pp - pm - mp + mm) / (4 * h * h)),
        d_tt=CoordVector.from_array((tp - 2 * center + tm) / (h * h)),
    )


def _frame_cross_normal(jet: SurfaceJet) -> np.ndarray:
    """Frame components of the normalized g-cross product d_s x d_t"""
    y = jet.position.y
    a = coord_to_frame_array(y, jet.d_s.as_array())
    b = coord_to_frame_array(y, jet.d_t.as_array())
    n = np.cross(a, b)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise DegenerateJetError("d_s and d_t are parallel")
    return n / norm


def fundamental_forms(jet: SurfaceJet, orientation: int = 1) -> FundamentalForms:
    """First and second fundamental forms with the oriented cross-product normal"""
    if orientation not in (1, -1):
        raise DomainError(f"orientation must be +1 or -1, got {orientation!r}")
    p = jet.position
    g = metric_at(p)
    gamma = christoffels_at(p)
    ds, dt, dss, dst, dtt = jet.arrays()

    E = float(ds @ g @ ds)
    F = float(ds @ g @ dt)
    G = float(dt @ g @ dt)
    if E * G - F * F < settings.degenerate_threshold:
        raise DegenerateJetError(f"EG - F^2 = {E * G - F * F:.3e} below {settings.degenerate_threshold:g}")

    normal = orientation * _frame_cross_normal(jet)

    def second(acc, u, v):
        nabla = acc + np.einsum("kij,i,j->k", gamma, u, v)
        return float(coord_to_frame_array(p.y, nabla) @ normal)

    return FundamentalForms(
        E=E, F=F, G=G,
        L=second(dss, ds, ds),
        M=second(dst, ds, dt),
        Nff=second(dtt, dt, dt),
        unit_normal=FrameVector.from_array(normal),
    )


def mean_curvature_oracle(jet: SurfaceJet, orientation: int = 1) -> float:
    """H = (E N - 2 F M + G L) / (2 (EG - F^2))"""
    return fundamental_forms(jet, orientation).mean_curvature


def normal_residuals(jet: SurfaceJet, forms: FundamentalForms) -> float:
    """max(|g(N, d_s)|, |g(N, d_t)|, |g(N, N) - 1|) in frame components"""
    y = jet.position.y
    n = forms.unit_normal.as_array()
    a = coord_to_frame_array(y, jet.d_s.as_array())
    b = coord_to_frame_array(y, jet.d_t.as_array())
    return float(max(abs(n @ a), abs(n @ b), abs(n @ n - 1.0)))


def _first_form(jet_at: Callable[[float, float], SurfaceJet], s: float, t: float) -> np.ndarray:
    jet = jet_at(s, t)
    g = metric_at(jet.position)
    ds, dt = jet.d_s.as_array(), jet.d_t.as_array()
    return np.array([ds @ g @ ds, ds @ g @ dt, dt @ g @ dt])


def gauss_curvature_induced(
    jet_at: Callable[[float, float], SurfaceJet],
    s: float,
    t: float,
    h: Optional[float] = None,
) -> float:
    """
    Brioschi formula for the pullback metric

    Args:
        jet_at: (s, t) -> SurfaceJet (analytic or finite-difference)
        s, t: base point
        h: finite-difference step for E, F, G (settings.gauss_fd_step if omitted)
    """
    if h is None:
        h = settings.gauss_fd_step * max(1.0, abs(s), abs(t))

    def form(ds, dt):
        return _first_form(jet_at, s + ds * h, t + dt * h)

    c = form(0, 0)
    sp, sm, tp, tm = form(1, 0), form(-1, 0), form(0, 1), form(0, -1)
    pp, pm, mp, mm = form(1, 1), form(1, -1), form(-1, 1), form(-1, -1)
    E, F, G = c
    Es, Fs, Gs = (sp - sm) / (2 * h)
    Et, Ft, Gt = (tp - tm) / (2 * h)
    Ett = (tp[0] - 2 * c[0] + tm[0]) / (h * h)
    Gss = (sp[2] - 2 * c[2] + sm[2]) / (h * h)
    Fst = (pp[1] - pm[1] - mp[1] + mm[1]) / (4 * h * h)

    first = np.linalg.det(np.array([
        [-0.5 * Ett + Fst - 0.5 * Gss, 0.5 * Es, Fs - 0.5 * Et],
        [Ft - 0.5 * Gs, E, F],
        [0.5 * Gt, F, G],
    ]))
    second = np.linalg.det(np.array([
        [0.0, 0.5 * Et, 0.5 * Gs],
        [0.5 * Et, E, F],
        [0.5 * Gs, F, G],
    ]))
    denom = (E * G - F * F) ** 2
    if denom < settings.degenerate_threshold ** 2:
        raise DegenerateJetError("induced metric is degenerate")
    return float((first - second) / denom)
