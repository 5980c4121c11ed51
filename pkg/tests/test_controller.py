"""Feedback law, analytic Jacobians, trigger radii, and hold rules."""

import math

import numpy as np
import pytest

from stlfunnel.controller import (
    ControllerState,
    TriggerConfig,
    TriggerEvent,
    compute_trigger_radius,
    continuous_law,
    law_jacobian,
    make_event,
    should_trigger,
)
from stlfunnel.errors import TriggerFloorError
from stlfunnel.formulas import SmoothingConfig
from stlfunnel.funnel import FunnelParams, PerformanceFunction
from stlfunnel.parsing import parse_psi
from stlfunnel.plants import omni_robot_team, single_integrator
from conftest import PSI1_TEXT


def _flat_funnel(rho_max=0.5, width=1.0):
    return FunnelParams(
        t_star=1.0, r=0.25 * rho_max, rho_max=rho_max,
        perf=PerformanceFunction(gamma0=width, gamma_inf=width, l=0.0),
    )


def _narrowing_funnel():
    return FunnelParams(
        t_star=5.0, r=1.0, rho_max=4.0,
        perf=PerformanceFunction(gamma0=12.0, gamma_inf=2.5, l=0.4),
    )


def test_law_hand_computed_1d():
    # rho = 1 - |x|; at x = 0.9: rho = 0.1, xi = -0.4,
    # eps = ln(0.6/0.4), grad rho = -1, and u = +eps toward the origin.
    psi = parse_psi("ball(0;0;1)")
    fp = _flat_funnel()
    plant = single_integrator(1)
    u = continuous_law(np.array([0.9]), 0.0, psi, fp, plant.g(np.array([0.9])))
    assert u == pytest.approx([math.log(1.5)], rel=1e-12)


def test_law_pushes_toward_satisfaction():
    psi = parse_psi("ball(0,1;5,5;3)")
    fp = _flat_funnel(rho_max=2.0, width=12.0)
    plant = single_integrator(2)
    x = np.array([0.0, 0.0])
    u = continuous_law(x, 0.0, psi, fp, plant.g(x))
    direction = u / np.linalg.norm(u)
    to_target = np.array([5.0, 5.0]) / math.sqrt(50.0)
    assert direction == pytest.approx(to_target, abs=1e-9)


def test_law_jacobian_matches_fd_integrator(rng):
    psi = parse_psi("ball(0,1;1,2;4) and aff(0.5,-0.25;3) and join(0;1;6)")
    fp = _narrowing_funnel()
    plant = single_integrator(2, gain=1.5)
    sm = SmoothingConfig(eta=1.2)
    checked = 0
    for _ in range(40):
        x = rng.uniform(-2, 4, 2)
        t = float(rng.uniform(0.0, 4.0))
        try:
            du_dx, du_dt = law_jacobian(x, t, psi, fp, plant, sm)
        except Exception:
            continue
        checked += 1
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (
                continuous_law(x + e, t, psi, fp, plant.g(x + e), sm)
                - continuous_law(x - e, t, psi, fp, plant.g(x - e), sm)
            ) / (2 * h)
            assert du_dx[:, i] == pytest.approx(fd, rel=1e-5, abs=1e-7)
        fd_t = (
            continuous_law(x, t + h, psi, fp, plant.g(x), sm)
            - continuous_law(x, t - h, psi, fp, plant.g(x), sm)
        ) / (2 * h)
        assert du_dt == pytest.approx(fd_t, rel=1e-5, abs=1e-7)
    assert checked >= 10


def test_law_jacobian_matches_fd_omni(rng):
    # Orientation states enter the actuation matrix; the Jacobian must
    # include that dependence (converted from degrees).
    psi = parse_psi(PSI1_TEXT)
    fp = FunnelParams(
        t_star=50.0, r=0.5, rho_max=1.8,
        perf=PerformanceFunction(gamma0=50.0, gamma_inf=30.0, l=0.05),
    )
    plant = omni_robot_team(n_agents=3, input_gain=100.0)
    sm = SmoothingConfig(eta=1.0)
    base = np.array([10.0, 10.0, 0.0, 38.0, 57.0, 0.0, 80.0, 15.0, 0.0])
    checked = 0
    for _ in range(30):
        x = base + rng.uniform(-2, 2, 9)
        t = float(rng.uniform(0.0, 6.0))
        try:
            du_dx, du_dt = law_jacobian(x, t, psi, fp, plant, sm)
        except Exception:
            continue
        checked += 1
        h = 1e-6
        for i in range(9):
            e = np.zeros(9)
            e[i] = h
            fd = (
                continuous_law(x + e, t, psi, fp, plant.g(x + e), sm)
                - continuous_law(x - e, t, psi, fp, plant.g(x - e), sm)
            ) / (2 * h)
            assert du_dx[:, i] == pytest.approx(fd, rel=2e-5, abs=1e-6)
        fd_t = (
            continuous_law(x, t + h, psi, fp, plant.g(x), sm)
            - continuous_law(x, t - h, psi, fp, plant.g(x), sm)
        ) / (2 * h)
        assert du_dt == pytest.approx(fd_t, rel=2e-5, abs=1e-8)
    assert checked >= 10


def test_trigger_strict_inequalities():
    ev = TriggerEvent(
        index=0, t=1.0, x=np.zeros(2), u=np.zeros(2), delta=0.5, cause="Initial"
    )
    cs = ControllerState(psi=parse_psi("ball(0,1;0,0;1)"), fp=_flat_funnel(), event=ev)
    # Exactly at the radius or the interval: hold.
    assert should_trigger(np.array([0.5, 0.0]), 1.0, cs) is None
    assert should_trigger(np.zeros(2), 1.5, cs) is None
    # Strictly beyond: fire, state deviation first.
    assert should_trigger(np.array([0.5001, 0.0]), 1.0, cs) == "StateDeviation"
    assert should_trigger(np.zeros(2), 1.5001, cs) == "MaxInterval"
    assert should_trigger(np.array([0.6, 0.0]), 2.0, cs) == "StateDeviation"


def test_trigger_radius_bounds_input_deviation(rng):
    # Design bound, checked empirically: everywhere inside the trigger
    # box the continuous law stays within delta_u of the event input.
    psi = parse_psi("ball(0,1;4,4;6)")
    fp = _narrowing_funnel()
    plant = single_integrator(2)
    tc = TriggerConfig(delta_u=0.5, sample_count=128)
    sm = SmoothingConfig()
    x_i = np.array([1.0, 1.0])
    t_i = 0.5
    delta = compute_trigger_radius(x_i, t_i, psi, fp, plant, tc, sm, rng)
    assert delta >= tc.delta_floor
    u_i = continuous_law(x_i, t_i, psi, fp, plant.g(x_i), sm)
    worst = 0.0
    for _ in range(500):
        x = x_i + rng.uniform(-delta, delta, 2)
        t = t_i + float(rng.uniform(0.0, delta))
        u = continuous_law(x, t, psi, fp, plant.g(x), sm)
        worst = max(worst, float(np.max(np.abs(u - u_i))))
    assert worst <= tc.delta_u + 1e-9


def test_trigger_radius_deterministic_given_rng():
    psi = parse_psi("ball(0,1;4,4;6)")
    fp = _narrowing_funnel()
    plant = single_integrator(2)
    tc = TriggerConfig(delta_u=1.0)
    a = compute_trigger_radius(
        np.array([1.0, 1.0]), 0.0, psi, fp, plant, tc, rng=np.random.default_rng(5)
    )
    b = compute_trigger_radius(
        np.array([1.0, 1.0]), 0.0, psi, fp, plant, tc, rng=np.random.default_rng(5)
    )
    assert a == b


def test_trigger_floor_near_funnel_boundary():
    # rho(x0) just inside the lower wall: no admissible sampling box.
    psi = parse_psi("ball(0;0;1)")
    fp = FunnelParams(
        t_star=1.0, r=0.1, rho_max=0.9,
        perf=PerformanceFunction(gamma0=1.0, gamma_inf=1.0, l=0.0),
    )
    plant = single_integrator(1)
    x = np.array([1.0999999])  # rho just above rho_max - gamma = -0.1
    with pytest.raises(TriggerFloorError):
        compute_trigger_radius(x, 0.0, psi, fp, plant, TriggerConfig())


def test_make_event_snapshots_state_and_input(rng):
    psi = parse_psi("ball(0,1;4,4;6)")
    fp = _narrowing_funnel()
    plant = single_integrator(2)
    cs = ControllerState(psi=psi, fp=fp)
    x = np.array([1.0, 2.0])
    ev = make_event(cs, x, 0.25, 3, "Initial", plant, TriggerConfig(), rng=rng)
    assert cs.event is ev
    assert ev.index == 3 and ev.cause == "Initial"
    assert ev.x == pytest.approx(x)
    assert ev.u == pytest.approx(
        continuous_law(x, 0.25, psi, fp, plant.g(x))
    )
    assert ev.delta > 0.0
