"""Fixed-step closed-loop simulation with event-triggered input holds.

Each sample: evaluate the continuous law and funnel state, process a
mode jump if one is due, refresh the held input when the trigger fires,
log, then integrate one step of dx/dt = f + g u_held + w with a fresh
uniform noise draw held constant across the step.  All clocks advance
on an integer step counter so jump bookkeeping is exact.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .controller import ControllerState, TriggerConfig, TriggerEvent, make_event, should_trigger
from .errors import DeadlineError, FunnelViolation, SynthesisError, TriggerFloorError
from .formulas import SequentialFormula, SmoothingConfig, normalize_sequential
from .funnel import gamma_at
from .monitor import monitor_robustness
from .plants import Plant
from .robustness import compile_leaf_table
from .sequencer import HybridState, SequencerConfig, active_psi, funnel_clock, init_sequencer, jump_if_due

__all__ = ["EpisodeSpec", "Trajectory", "RunMetrics", "step_rk4", "run_episode"]


@dataclass(frozen=True)
class EpisodeSpec:
    """Everything needed to run one closed-loop episode."""

    plant: Plant
    theta: SequentialFormula
    x0: np.ndarray
    seq_cfg: SequencerConfig = SequencerConfig()
    trigger: TriggerConfig = TriggerConfig()
    dt: float = 0.01
    horizon: float | None = None
    seed: int = 0

    def resolved_horizon(self) -> float:
        if self.horizon is not None:
            return self.horizon
        last = max(task.window[1] for task in normalize_sequential(self.theta))
        return last + self.seq_cfg.terminal_tail


@dataclass
class Trajectory:
    """Uniformly sampled run log."""

    dt: float
    t: np.ndarray
    X: np.ndarray
    U: np.ndarray
    rho_active: np.ndarray
    gamma: np.ndarray
    mode: np.ndarray


@dataclass
class RunMetrics:
    samples: int
    triggers: int
    reduction: float
    satisfied: bool
    rho_theta: float
    min_margin: float
    wall_time: float
    failure: str | None = None
    failure_time: float | None = None
    max_input_deviation: float = 0.0
    min_delta: float = math.inf
    min_inter_event: float = math.inf
    min_xi_gap: float = math.inf
    funnels: list[dict] = field(default_factory=list)


def step_rk4(plant: Plant, x: np.ndarray, u_held: np.ndarray, w: np.ndarray, dt: float) -> np.ndarray:
    """Classical fourth-order step with input and noise held constant."""

    def rate(xs: np.ndarray) -> np.ndarray:
        return plant.f(xs) + plant.g(xs) @ u_held + w

    k1 = rate(x)
    k2 = rate(x + 0.5 * dt * k1)
    k3 = rate(x + 0.5 * dt * k2)
    k4 = rate(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _funnel_record(z: HybridState) -> dict:
    pf = z.fp.perf
    return {
        "mode": z.q,
        "entry_time": z.Delta,
        "t_star": z.fp.t_star,
        "r": z.fp.r,
        "rho_max": z.fp.rho_max,
        "gamma0": pf.gamma0,
        "gamma_inf": pf.gamma_inf,
        "l": pf.l,
    }


def run_episode(spec: EpisodeSpec) -> tuple[Trajectory, RunMetrics, list[TriggerEvent]]:
    """Simulate one episode; never raises on runtime failures.

    Failures (funnel violation, missed deadline, trigger floor, horizon
    exhaustion) mark the metrics and truncate the trajectory instead of
    raising, so callers always receive the partial logs.
    """
    t_start = time.perf_counter()
    rng = np.random.default_rng(spec.seed)
    plant = spec.plant
    smoothing = spec.seq_cfg.smoothing
    eta = smoothing.eta
    dt = spec.dt
    horizon = spec.resolved_horizon()
    x = np.array(spec.x0, dtype=float)

    rows_t: list[float] = []
    rows_x: list[np.ndarray] = []
    rows_u: list[np.ndarray] = []
    rows_rho: list[float] = []
    rows_gamma: list[float] = []
    rows_mode: list[int] = []
    events: list[TriggerEvent] = []
    metrics = RunMetrics(
        samples=0, triggers=0, reduction=0.0, satisfied=False,
        rho_theta=math.nan, min_margin=math.inf, wall_time=0.0,
    )

    def finish(failure: str | None, failure_time: float | None) -> tuple[Trajectory, RunMetrics, list[TriggerEvent]]:
        traj = Trajectory(
            dt=dt,
            t=np.asarray(rows_t),
            X=np.asarray(rows_x),
            U=np.asarray(rows_u),
            rho_active=np.asarray(rows_rho),
            gamma=np.asarray(rows_gamma),
            mode=np.asarray(rows_mode, dtype=int),
        )
        metrics.samples = max(len(rows_t) - 1, 0)
        metrics.triggers = len(events)
        metrics.reduction = 1.0 - metrics.triggers / metrics.samples if metrics.samples else 0.0
        metrics.failure = failure
        metrics.failure_time = failure_time
        metrics.satisfied = failure is None
        if len(event_steps) >= 2:
            # Step counts keep the grid spacing exact in floats.
            metrics.min_inter_event = float(np.min(np.diff(event_steps))) * dt
        if metrics.satisfied:
            try:
                metrics.rho_theta = monitor_robustness(spec.theta, traj, 0.0)
            except Exception:
                metrics.rho_theta = math.nan
        metrics.wall_time = time.perf_counter() - t_start
        return traj, metrics, events

    event_steps: list[int] = []
    try:
        z = init_sequencer(spec.theta, x, spec.seq_cfg)
    except (SynthesisError, DeadlineError) as exc:
        return finish(f"synthesis: {exc}", 0.0)

    metrics.funnels.append(_funnel_record(z))
    cs = ControllerState(psi=active_psi(z), fp=z.fp)
    table = compile_leaf_table(active_psi(z))
    k = 0
    k_entry = 0
    u_buf = np.empty(plant.m)

    while True:
        t = k * dt
        z.t_local = (k - k_entry) * dt
        t_fun = funnel_clock(z)
        pf = z.fp.perf
        xi = kernels.u_xi_eval(
            *table.arrays(), x, t_fun, eta,
            z.fp.rho_max, pf.gamma0, pf.gamma_inf, pf.l,
            plant.kernel_kind, plant.kernel_gain, plant.kernel_gbase, u_buf,
        )
        gam = gamma_at(pf, t_fun)
        rho = z.fp.rho_max + xi * gam
        if not (-1.0 < xi < 0.0):
            rows_t.append(t); rows_x.append(x.copy()); rows_u.append(np.full(plant.m, np.nan))
            rows_rho.append(rho); rows_gamma.append(gam); rows_mode.append(z.q)
            return finish("funnel", t)
        u_cont = u_buf.copy()

        jumped = False
        try:
            z_next = jump_if_due(z, x, spec.seq_cfg, rho=rho)
        except (DeadlineError, SynthesisError) as exc:
            rows_t.append(t); rows_x.append(x.copy()); rows_u.append(np.full(plant.m, np.nan))
            rows_rho.append(rho); rows_gamma.append(gam); rows_mode.append(z.q)
            return finish(f"deadline: {exc}", t)
        if z_next is not None:
            z = z_next
            jumped = True
            k_entry = k
            z.t_local = 0.0
            t_fun = funnel_clock(z)
            if not z.terminal:
                metrics.funnels.append(_funnel_record(z))
            cs = ControllerState(psi=active_psi(z), fp=z.fp)
            table = compile_leaf_table(active_psi(z))
            pf = z.fp.perf
            xi = kernels.u_xi_eval(
                *table.arrays(), x, t_fun, eta,
                z.fp.rho_max, pf.gamma0, pf.gamma_inf, pf.l,
                plant.kernel_kind, plant.kernel_gain, plant.kernel_gbase, u_buf,
            )
            gam = gamma_at(pf, t_fun)
            rho = z.fp.rho_max + xi * gam
            if not (-1.0 < xi < 0.0):
                rows_t.append(t); rows_x.append(x.copy()); rows_u.append(np.full(plant.m, np.nan))
                rows_rho.append(rho); rows_gamma.append(gam); rows_mode.append(z.q)
                return finish("funnel", t)
            u_cont = u_buf.copy()

        cause = None
        if cs.event is None:
            cause = "ModeSwitch" if jumped else "Initial"
        else:
            cause = should_trigger(x, t_fun, cs)
        if cause is not None:
            try:
                event = make_event(
                    cs, x, t_fun, len(events), cause, plant, spec.trigger, smoothing, rng
                )
            except (TriggerFloorError, FunnelViolation) as exc:
                rows_t.append(t); rows_x.append(x.copy()); rows_u.append(np.full(plant.m, np.nan))
                rows_rho.append(rho); rows_gamma.append(gam); rows_mode.append(z.q)
                kind = "trigger_floor" if isinstance(exc, TriggerFloorError) else "funnel"
                return finish(kind, t)
            # The controller tracks the funnel clock; log wall-clock time.
            events.append(replace(event, t=t))
            event_steps.append(k)
            metrics.min_delta = min(metrics.min_delta, event.delta)

        u_held = cs.event.u
        dev = float(np.max(np.abs(u_cont - u_held)))
        metrics.max_input_deviation = max(metrics.max_input_deviation, dev)
        metrics.min_margin = min(metrics.min_margin, rho - (z.fp.rho_max - gam), z.fp.rho_max - rho)
        metrics.min_xi_gap = min(metrics.min_xi_gap, 1.0 + xi, -xi)

        rows_t.append(t); rows_x.append(x.copy()); rows_u.append(u_held.copy())
        rows_rho.append(rho); rows_gamma.append(gam); rows_mode.append(z.q)

        if z.terminal and z.t_local >= spec.seq_cfg.terminal_tail - 1e-12:
            return finish(None, None)
        if t >= horizon - 1e-12:
            return finish(f"horizon: mode {z.q} unfinished", t)

        w = rng.uniform(-plant.w_max, plant.w_max, plant.n) if plant.w_max > 0 else np.zeros(plant.n)
        x = step_rk4(plant, x, u_held, w, dt)
        k += 1
