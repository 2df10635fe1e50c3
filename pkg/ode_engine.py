"""
Deterministic explicit integrators for the reduction ODEs

Dormand-Prince 5(4) with PI step control, a fixed-step classical RK4 used
for convergence checks, terminal events located by bisection, cubic Hermite
dense output, and direction-field sampling for phase portraits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Literal, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from sl2r_core import DomainError, IntegratorError

logger = logging.getLogger(__name__)


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class Termination(str, Enum):
    REACHED_END = "ReachedEnd"
    EVENT = "Event"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class Event:
    """Terminal event: integration stops where `function` changes sign"""

    name: str
    function: Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class OdeSystem:
    """Right-hand side of s -> state with a domain predicate and terminal events"""

    name: str
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    domain: Optional[Callable[[np.ndarray], bool]] = None
    events: Tuple[Event, ...] = ()
    state_names: Tuple[str, ...] = ()

    def evaluate(self, s: float, state: np.ndarray) -> np.ndarray:
        return np.asarray(self.rhs(s, state), dtype=float)

    def in_domain(self, state: np.ndarray) -> bool:
        if not np.all(np.isfinite(state)):
            return False
        return True if self.domain is None else bool(self.domain(state))


class IntegratorConfig(BaseModel):
    """Integrator settings; defaults come from the application settings"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Literal["rk4", "rk45"] = "rk45"
    step: float = Field(default_factory=lambda: settings.rk4_step, gt=0)
    initial_step: Optional[float] = Field(default=None, gt=0)
    max_step: Optional[float] = Field(default=None, gt=0)
    rtol: float = Field(default_factory=lambda: settings.rtol, gt=0)
    atol: float = Field(default_factory=lambda: settings.atol, gt=0)
    max_steps: int = Field(default_factory=lambda: settings.max_steps, gt=0)
    event_tol: float = Field(default_factory=lambda: settings.event_tol, gt=0)
    safety: float = Field(default=0.9, gt=0, le=1)
    min_factor: float = Field(default=0.2, gt=0, le=1)
    max_factor: float = Field(default=5.0, ge=1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered samples of a solution with the reason integration stopped"""

    system_name: str
    s: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    termination: Termination
    event_name: Optional[str] = None
    event_s: Optional[float] = None
    event_bracket: Optional[Tuple[float, float]] = None
    message: str = ""
    steps: int = 0
    rejected: int = 0
    state_names: Tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.s)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def direction(self) -> float:
        return 1.0 if len(self.s) < 2 or self.s[-1] >= self.s[0] else -1.0

    def covered_fraction(self, s_span: Sequence[float]) -> float:
        total = abs(float(s_span[1]) - float(s_span[0]))
        if total == 0.0:
            return 1.0
        return abs(float(self.s[-1]) - float(self.s[0])) / total

    def _locate(self, s_query: np.ndarray):
        s_query = np.atleast_1d(np.asarray(s_query, dtype=float))
        grid = self.s if self.direction > 0 else self.s[::-1]
        lo, hi = grid[0], grid[-1]
        if np.any(s_query < lo - 1e-12 * max(1.0, abs(lo))) or np.any(s_query > hi + 1e-12 * max(1.0, abs(hi))):
            raise DomainError(f"dense output requested outside [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(grid, s_query, side="right") - 1, 0, len(grid) - 2)
        if self.direction < 0:
            # map back to the original (decreasing) ordering
            n = len(self.s)
            i0 = n - 1 - idx
            i1 = i0 - 1
        else:
            i0 = idx
            i1 = idx + 1
        return s_query, i0, i1

    def dense(self, s_query) -> np.ndarray:
        """Cubic Hermite interpolation between accepted steps; rows follow s_query"""
        if len(self.s) == 1:
            return np.repeat(self.states[:1], np.size(s_query), axis=0)
        s_query, i0, i1 = self._locate(s_query)
        s0, s1 = self.s[i0], self.s[i1]
        h = s1 - s0
        th = ((s_query - s0) / h)[:, None]
        y0, y1 = self.states[i0], self.states[i1]
        f0, f1 = self.derivatives[i0], self.derivatives[i1]
        h = h[:, None]
        h00 = 2 * th**3 - 3 * th**2 + 1
        h10 = th**3 - 2 * th**2 + th
        h01 = -2 * th**3 + 3 * th**2
        h11 = th**3 - th**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def dense_derivative(self, s_query) -> np.ndarray:
        if len(self.s) == 1:
            return np.repeat(self.derivatives[:1], np.size(s_query), axis=0)
        s_query, i0, i1 = self._locate(s_query)
        s0, s1 = self.s[i0], self.s[i1]
        h = (s1 - s0)[:, None]
        th = ((s_query - s0) / (s1 - s0))[:, None]
        y0, y1 = self.states[i0], self.states[i1]
        f0, f1 = self.derivatives[i0], self.derivatives[i1]
        d00 = (6 * th**2 - 6 * th) / h
        d10 = 3 * th**2 - 4 * th + 1
        d01 = (-6 * th**2 + 6 * th) / h
        d11 = 3 * th**2 - 2 * th
        return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1

    def to_frame(self) -> pd.DataFrame:
        names = list(self.state_names) or [f"u{i}" for i in range(self.states.shape[1])]
        frame = pd.DataFrame(self.states, columns=names)
        frame.insert(0, "s", self.s)
        return frame

    def summary(self) -> dict:
        return {
            "system": self.system_name,
            "samples": len(self),
            "s_start": float(self.s[0]),
            "s_end": float(self.s[-1]),
            "termination": self.termination.value,
            "event": self.event_name,
            "event_s": self.event_s,
            "steps": self.steps,
            "rejected": self.rejected,
            "message": self.message,
        }


@dataclass(frozen=True, eq=False)
class DirectionSample:
    state: np.ndarray
    direction: np.ndarray


# ============================================================================
# STEPPERS
# ============================================================================

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def _dp_step(system: OdeSystem, s: float, y: np.ndarray, f: np.ndarray, h: float):
    """One Dormand-Prince step; returns (y_new, f_new, local error vector)"""
    k = np.empty((7, y.size))
    k[0] = f
    for i in range(1, 7):
        yi = y + h * (np.asarray(_DP_A[i]) @ k[:i])
        k[i] = system.evaluate(s + _DP_C[i] * h, yi)
    y_new = y + h * (_DP_B @ k)
    # FSAL: the last stage is the derivative at the new point
    return y_new, k[6], h * (_DP_E @ k)


def _rk4_step(system: OdeSystem, s: float, y: np.ndarray, f: np.ndarray, h: float):
    k1 = f
    k2 = system.evaluate(s + 0.5 * h, y + 0.5 * h * k1)
    k3 = system.evaluate(s + 0.5 * h, y + 0.5 * h * k2)
    k4 = system.evaluate(s + h, y + h * k3)
    y_new = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y_new, system.evaluate(s + h, y_new), None


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(values * values)))


def _initial_step(system: OdeSystem, s0: float, y0: np.ndarray, f0: np.ndarray,
                  span: float, direction: float, config: IntegratorConfig) -> float:
    if config.initial_step is not None:
        return min(config.initial_step, span)
    scale = config.atol + config.rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = system.evaluate(s0 + direction * h0, y0 + direction * h0 * f0)
    except DomainError:
        return min(h0, span)
    if not np.all(np.isfinite(f1)):
        return min(h0, span)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


# ============================================================================
# INTEGRATION
# ============================================================================

class _Builder:
    """Accumulates accepted samples of one trajectory"""

    def __init__(self, system: OdeSystem):
        self.system = system
        self.s: List[float] = []
        self.states: List[np.ndarray] = []
        self.derivatives: List[np.ndarray] = []

    def append(self, s: float, y: np.ndarray, f: np.ndarray):
        self.s.append(float(s))
        self.states.append(np.array(y, dtype=float))
        self.derivatives.append(np.array(f, dtype=float))

    def build(self, termination: Termination, **kwargs) -> Trajectory:
        return Trajectory(
            system_name=self.system.name,
            s=np.array(self.s),
            states=np.vstack(self.states),
            derivatives=np.vstack(self.derivatives),
            termination=termination,
            state_names=self.system.state_names,
            **kwargs,
        )


def _crossings(system: OdeSystem, s: float, y: np.ndarray, s_new: float, y_new: np.ndarray):
    """Names of events and of the domain boundary crossed over one step"""
    crossed = []
    for event in system.events:
        g_old = event.function(s, y)
        g_new = event.function(s_new, y_new)
        if g_old != 0.0 and (g_new == 0.0 or math.copysign(1.0, g_old) != math.copysign(1.0, g_new)):
            crossed.append(event)
    if not system.in_domain(y_new):
        crossed.append(None)
    return crossed


def _locate_event(system, stepper, event: Optional[Event], s, y, f, s_new, tol):
    """Bisection on the partial step from (s, y); returns (lo, hi, y_lo, f_lo)"""

    def state_at(sigma):
        if sigma == s:
            return y, f
        try:
            y_sigma, f_sigma, _ = stepper(system, s, y, f, sigma - s)
        except DomainError:
            return None, None
        if not np.all(np.isfinite(f_sigma)):
            return None, None
        return y_sigma, f_sigma

    def is_crossed(sigma, y_sigma):
        if y_sigma is None or not np.all(np.isfinite(y_sigma)):
            return True
        if event is None:
            return not system.in_domain(y_sigma)
        g_old = event.function(s, y)
        g_mid = event.function(sigma, y_sigma)
        return g_mid == 0.0 or math.copysign(1.0, g_mid) != math.copysign(1.0, g_old)

    lo, hi = s, s_new
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        y_mid, _ = state_at(mid)
        if is_crossed(mid, y_mid):
            hi = mid
        else:
            lo = mid
    y_lo, f_lo = state_at(lo)
    return lo, hi, y_lo, f_lo


def integrate(
    system: OdeSystem,
    initial_state: Sequence[float],
    s_span: Sequence[float],
    config: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """
    Integrate `system` from s_span[0] to s_span[1] (either direction)

    Args:
        system: right-hand side, domain and events
        initial_state: state at s_span[0]; must lie in the domain
        s_span: (start, end)
        config: integrator settings (RK45 with default tolerances if omitted)

    Returns:
        Trajectory with termination ReachedEnd, Event(name) or StepFailure
    """
    config = config or IntegratorConfig()
    y = np.asarray(initial_state, dtype=float).copy()
    if y.shape != (system.dimension,):
        raise DomainError(f"{system.name}: expected a state of dimension {system.dimension}, got {y.shape}")
    if not system.in_domain(y):
        raise DomainError(f"{system.name}: initial state {y.tolist()} is outside the domain")

    s0, s1 = float(s_span[0]), float(s_span[1])
    direction = 1.0 if s1 >= s0 else -1.0
    span = abs(s1 - s0)
    f = system.evaluate(s0, y)
    if not np.all(np.isfinite(f)):
        raise IntegratorError(f"{system.name}: right-hand side is not finite at the initial state")

    builder = _Builder(system)
    builder.append(s0, y, f)
    if span == 0.0:
        return builder.build(Termination.REACHED_END)

    adaptive = config.method == "rk45"
    stepper = _dp_step if adaptive else _rk4_step
    h = _initial_step(system, s0, y, f, span, direction, config) if adaptive else min(config.step, span)
    if config.max_step is not None:
        h = min(h, config.max_step)

    s = s0
    steps = rejected = 0
    err_prev = 1e-4
    last_rejected = False
    s_left: Optional[float] = None
    logger.debug(f"{system.name}: integrating from {s0} to {s1} with {config.method}")

    while direction * (s1 - s) > 0.0:
        if steps >= config.max_steps:
            return builder.build(Termination.STEP_FAILURE, message="maximum number of steps reached",
                                 steps=steps, rejected=rejected)
        remaining = abs(s1 - s)
        # absorb a round-off sliver into the final step
        if remaining - h <= 1e-12 * max(1.0, abs(s1)):
            h = remaining
        if h < 1e-14 * max(1.0, abs(s)):
            if s_left is not None:
                # the adaptive steps closed in on the boundary of the right-hand side
                logger.debug(f"{system.name}: left the domain near s={s}")
                return builder.build(Termination.EVENT, event_name="left domain", event_s=0.5 * (s + s_left),
                                     event_bracket=(min(s, s_left), max(s, s_left)), steps=steps, rejected=rejected)
            logger.debug(f"{system.name}: step size underflow at s={s}")
            return builder.build(Termination.STEP_FAILURE, message=f"step size underflow at s={s!r}",
                                 steps=steps, rejected=rejected)

        step_h = direction * h
        # land exactly on the end point
        s_new = s1 if h == remaining else s + step_h
        try:
            y_new, f_new, err_vec = stepper(system, s, y, f, s_new - s)
        except DomainError:
            # a stage or the end point fell outside the domain of the right-hand side
            y_new = f_new = err_vec = None
        left = y_new is None
        finite = not left and bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new)))
        boundary = None

        if adaptive:
            if left or not finite:
                rejected += 1
                last_rejected = True
                s_left = s_new if left else None
                h *= 0.25
                continue
            scale = config.atol + config.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(err_vec / scale)
            s_left = None
            if err > 1.0:
                rejected += 1
                last_rejected = True
                h *= max(config.min_factor, config.safety * err ** -0.2)
                continue
            if err == 0.0:
                factor = config.max_factor
            else:
                factor = config.safety * err ** -0.14 * err_prev ** 0.08
                factor = min(config.max_factor, max(config.min_factor, factor))
            if last_rejected:
                factor = min(1.0, factor)
            err_prev = max(err, 1e-4)
            last_rejected = False
        else:
            factor = 1.0
            if left:
                # fixed step: shorten to the last partial step that stays inside
                lo, hi, y_lo, f_lo = _locate_event(system, stepper, None, s, y, f, s_new, config.event_tol)
                boundary = (lo, hi)
                s_new, y_new, f_new = lo, y_lo, f_lo
            elif not finite:
                return builder.build(Termination.STEP_FAILURE, message=f"non-finite state at s={s_new!r}",
                                     steps=steps, rejected=rejected)

        steps += 1
        crossed = _crossings(system, s, y, s_new, y_new) if s_new != s else []
        if not crossed and boundary is not None:
            lo, hi = boundary
            if lo != s:
                builder.append(lo, y_new, f_new)
            logger.debug(f"{system.name}: left the domain near s={0.5 * (lo + hi)}")
            return builder.build(Termination.EVENT, event_name="left domain", event_s=0.5 * (lo + hi),
                                 event_bracket=(min(lo, hi), max(lo, hi)), steps=steps, rejected=rejected)
        if crossed:
            located = [
                (_locate_event(system, stepper, event, s, y, f, s_new, config.event_tol), event)
                for event in crossed
            ]
            (lo, hi, y_lo, f_lo), event = min(located, key=lambda item: direction * item[0][0])
            if lo != s:
                builder.append(lo, y_lo, f_lo)
            name = event.name if event is not None else "left domain"
            logger.debug(f"{system.name}: event '{name}' near s={0.5 * (lo + hi)}")
            return builder.build(Termination.EVENT, event_name=name, event_s=0.5 * (lo + hi),
                                 event_bracket=(min(lo, hi), max(lo, hi)), steps=steps, rejected=rejected)

        builder.append(s_new, y_new, f_new)
        s, y, f = s_new, y_new, f_new
        if adaptive:
            h *= factor
            if config.max_step is not None:
                h = min(h, config.max_step)

    return builder.build(Termination.REACHED_END, steps=steps, rejected=rejected)


def sample_direction_field(
    system: OdeSystem,
    axis0: Sequence[float],
    axis1: Sequence[float],
    s: float = 0.0,
) -> List[DirectionSample]:
    """
    Unit-normalized right-hand side on a planar grid

    Row-major order: axis0 is the outer loop. Points outside the domain are
    skipped; equilibria produce a zero direction.
    """
    if system.dimension != 2:
        raise DomainError(f"{system.name}: direction fields need a planar system, got dimension {system.dimension}")
    samples = []
    for u in axis0:
        for v in axis1:
            state = np.array([float(u), float(v)])
            if not system.in_domain(state):
                continue
            d = system.evaluate(s, state)
            norm = float(np.hypot(d[0], d[1]))
            direction = d / norm if norm > 0.0 and math.isfinite(norm) else np.zeros(2)
            samples.append(DirectionSample(state=state, direction=direction))
    return samples
