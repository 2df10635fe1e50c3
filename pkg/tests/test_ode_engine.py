"""Tests for the explicit integrators, events, dense output and direction fields"""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import solve_ivp

from ode_engine import (
    Event,
    IntegratorConfig,
    OdeSystem,
    Termination,
    integrate,
    sample_direction_field,
)
from sl2r_core import DomainError, IntegratorError

DECAY = OdeSystem("decay", 1, lambda s, u: -u)
OSCILLATOR = OdeSystem("oscillator", 2, lambda s, u: np.array([u[1], -u[0]]), state_names=("q", "p"))


def test_rk45_exponential_decay():
    traj = integrate(DECAY, [1.0], (0.0, 2.0))
    assert traj.termination is Termination.REACHED_END
    assert traj.s[-1] == 2.0
    assert traj.final_state[0] == pytest.approx(math.exp(-2.0), abs=1e-9)


def test_backward_integration():
    traj = integrate(DECAY, [1.0], (0.0, -1.0))
    assert traj.direction == -1.0
    assert traj.final_state[0] == pytest.approx(math.e, rel=1e-9)


def test_rk4_fourth_order():
    errors = []
    for step in (0.1, 0.05):
        traj = integrate(OSCILLATOR, [1.0, 0.0], (0.0, 2.0), IntegratorConfig(method="rk4", step=step))
        assert traj.termination is Termination.REACHED_END
        errors.append(abs(traj.final_state[0] - math.cos(2.0)))
    assert math.log2(errors[0] / errors[1]) == pytest.approx(4.0, abs=0.3)


def test_fixed_step_lands_on_end_point():
    traj = integrate(DECAY, [1.0], (0.0, 1.0), IntegratorConfig(method="rk4", step=0.1))
    assert traj.termination is Termination.REACHED_END
    assert traj.s[-1] == 1.0


def test_agrees_with_scipy():
    reference = solve_ivp(lambda s, u: [u[1], -u[0]], (0.0, 5.0), [0.3, 1.0], rtol=1e-12, atol=1e-14)
    traj = integrate(OSCILLATOR, [0.3, 1.0], (0.0, 5.0), IntegratorConfig(rtol=1e-11, atol=1e-13))
    assert traj.final_state == pytest.approx(reference.y[:, -1], abs=1e-8)


def test_terminal_event_located():
    system = OdeSystem("ramp", 1, lambda s, u: np.array([-1.0]), events=(Event("half", lambda s, u: u[0] - 0.5),))
    traj = integrate(system, [1.0], (0.0, 3.0))
    assert traj.termination is Termination.EVENT
    assert traj.event_name == "half"
    assert traj.event_s == pytest.approx(0.5, abs=1e-8)
    lo, hi = traj.event_bracket
    assert lo <= 0.5 + 1e-8 and hi >= 0.5 - 1e-8


def _guarded_fall(s, u):
    if u[0] <= 0.0:
        raise DomainError(f"u must be positive, got {u[0]}")
    return np.array([-1.0])


GUARDED_FALL = OdeSystem("guarded fall", 1, _guarded_fall, domain=lambda u: u[0] > 0.0)


def test_event_located_to_event_tolerance():
    system = OdeSystem("decay to level", 1, lambda s, u: -u, events=(Event("level", lambda s, u: u[0] - 1e-3),))
    config = IntegratorConfig(rtol=1e-12, atol=1e-15, event_tol=1e-9)
    traj = integrate(system, [1.0], (0.0, 20.0), config)
    assert traj.termination is Termination.EVENT
    assert abs(traj.event_s - math.log(1000.0)) < 1e-9
    lo, hi = traj.event_bracket
    assert hi - lo <= 1e-9


@pytest.mark.parametrize("method", ["rk45", "rk4"])
def test_rhs_domain_error_ends_at_the_boundary(method):
    traj = integrate(GUARDED_FALL, [1.05], (0.0, 5.0), IntegratorConfig(method=method, step=0.1))
    assert traj.termination is Termination.EVENT
    assert traj.event_name == "left domain"
    assert traj.event_s == pytest.approx(1.05, abs=1e-8)
    assert np.all(traj.states[:, 0] > 0.0)


def test_non_finite_state_is_a_step_failure():
    system = OdeSystem("blowup", 1, lambda s, u: np.array([math.nan if s > 0.5 else -1.0]),
                       domain=lambda u: u[0] > 0.0)
    traj = integrate(system, [1.0], (0.0, 2.0), IntegratorConfig(method="rk4", step=0.1))
    assert traj.termination is Termination.STEP_FAILURE
    assert "non-finite" in traj.message
    assert traj.s[-1] == pytest.approx(0.5)


def test_domain_exit_reported_as_event():
    system = OdeSystem("fall", 1, lambda s, u: np.array([-1.0]), domain=lambda u: u[0] > 0.0)
    traj = integrate(system, [1.0], (0.0, 5.0))
    assert traj.termination is Termination.EVENT
    assert traj.event_name == "left domain"
    assert traj.event_s == pytest.approx(1.0, abs=1e-8)
    assert np.all(traj.states[:, 0] > 0.0)


def test_initial_state_checks():
    system = OdeSystem("fall", 1, lambda s, u: np.array([-1.0]), domain=lambda u: u[0] > 0.0)
    with pytest.raises(DomainError):
        integrate(system, [-1.0], (0.0, 1.0))
    with pytest.raises(DomainError):
        integrate(DECAY, [1.0, 2.0], (0.0, 1.0))
    with pytest.raises(IntegratorError):
        integrate(OdeSystem("bad", 1, lambda s, u: np.array([math.nan])), [1.0], (0.0, 1.0))


def test_step_budget_is_a_step_failure():
    traj = integrate(DECAY, [1.0], (0.0, 10.0), IntegratorConfig(method="rk4", step=0.01, max_steps=5))
    assert traj.termination is Termination.STEP_FAILURE
    assert traj.covered_fraction((0.0, 10.0)) == pytest.approx(0.005)


def test_config_validation():
    with pytest.raises(ValidationError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValidationError):
        IntegratorConfig(rtol=-1.0)
    with pytest.raises(ValidationError):
        IntegratorConfig(unknown=1)


def test_dense_output():
    traj = integrate(OSCILLATOR, [1.0, 0.0], (0.0, 3.0))
    s = np.linspace(0.0, 3.0, 37)
    assert traj.dense(s)[:, 0] == pytest.approx(np.cos(s), abs=1e-5)
    assert traj.dense_derivative(s)[:, 0] == pytest.approx(-np.sin(s), abs=1e-4)
    with pytest.raises(DomainError):
        traj.dense([3.5])


def test_to_frame_and_summary():
    traj = integrate(OSCILLATOR, [1.0, 0.0], (0.0, 1.0))
    frame = traj.to_frame()
    assert list(frame.columns) == ["s", "q", "p"]
    assert len(frame) == len(traj)
    summary = traj.summary()
    assert summary["termination"] == "ReachedEnd"
    assert summary["s_end"] == 1.0


def test_identical_runs_are_identical():
    a = integrate(OSCILLATOR, [0.2, 0.9], (0.0, 4.0))
    b = integrate(OSCILLATOR, [0.2, 0.9], (0.0, 4.0))
    assert np.array_equal(a.s, b.s)
    assert np.array_equal(a.states, b.states)


def test_direction_field_row_major_and_normalized():
    samples = sample_direction_field(OSCILLATOR, [0.0, 1.0], [1.0, 2.0, 3.0])
    assert [tuple(d.state) for d in samples] == [(0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]
    for d in samples:
        assert np.linalg.norm(d.direction) == pytest.approx(1.0)


def test_direction_field_skips_domain_and_rejects_3d():
    planar = OdeSystem("half", 2, lambda s, u: u, domain=lambda u: u[0] > 0.0)
    assert len(sample_direction_field(planar, [-1.0, 0.0, 1.0], [0.5])) == 1
    with pytest.raises(DomainError):
        sample_direction_field(OdeSystem("three", 3, lambda s, u: u), [1.0], [1.0])
