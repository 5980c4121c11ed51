"""Funnel feedback law and the event-triggered hold around it.

The continuous law is u(x, t) = -eps(x, t) * g(x)^T * grad rho(x) with
eps the transformed funnel error.  Between events the input is frozen;
a new event fires when the state leaves an infinity-norm ball of radius
delta_i around the event state or when delta_i seconds elapse, with
delta_i chosen so the frozen input stays within delta_u of the
continuous law over the whole inter-event box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import qmc

from . import kernels
from .errors import FunnelViolation, TriggerFloorError
from .formulas import NonTemporalFormula, SmoothingConfig
from .funnel import FunnelParams, gamma_at, gamma_rate, transform_slope, transformed_error
from .plants import Plant
from .robustness import compile_leaf_table, smooth_psi_hessian, smooth_psi_value_and_grad

__all__ = [
    "TriggerConfig",
    "TriggerEvent",
    "ControllerState",
    "continuous_law",
    "law_jacobian",
    "compute_trigger_radius",
    "should_trigger",
    "held_input",
]

Cause = Literal["StateDeviation", "MaxInterval", "Initial", "ModeSwitch"]

_XI_GUARD = 1e-3
_FD_STEP = 1e-6
_CORNER_CAP = 1024
_DEG = math.pi / 180.0


@dataclass(frozen=True)
class TriggerConfig:
    """Parameters of the trigger-radius construction."""

    delta_u: float = 50.0
    lipschitz_safety: float = 2.0
    delta_x0: float = 0.5
    delta_t0: float = 0.5
    shrink: float = 0.5
    sample_count: int = 256
    delta_floor: float = 1e-6

    def __post_init__(self) -> None:
        if min(self.delta_u, self.delta_x0, self.delta_t0, self.delta_floor) <= 0.0:
            raise ValueError("trigger lengths must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must sit in (0, 1)")
        if self.lipschitz_safety < 1.0:
            raise ValueError("lipschitz_safety must be at least 1")


@dataclass(frozen=True)
class TriggerEvent:
    index: int
    t: float
    x: np.ndarray
    u: np.ndarray
    delta: float
    cause: Cause


@dataclass
class ControllerState:
    """Single-owner mutable controller bookkeeping for one episode."""

    psi: NonTemporalFormula
    fp: FunnelParams
    event: TriggerEvent | None = None


def continuous_law(
    x: np.ndarray,
    t: float,
    psi: NonTemporalFormula,
    fp: FunnelParams,
    g: np.ndarray,
    smoothing: SmoothingConfig = SmoothingConfig(),
) -> np.ndarray:
    """Continuous funnel feedback u = -eps * g^T * grad rho.

    ``g`` is the actuation matrix already evaluated at x.  Raises
    FunnelViolation outside the funnel.
    """
    te = transformed_error(psi, fp, x, t, smoothing)
    _, grad = smooth_psi_value_and_grad(psi, x, smoothing)
    return -te.eps * (np.asarray(g).T @ grad)


def law_jacobian(
    x: np.ndarray,
    t: float,
    psi: NonTemporalFormula,
    fp: FunnelParams,
    plant: Plant,
    smoothing: SmoothingConfig = SmoothingConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Jacobian of the law: (du/dx with shape (m, n), du/dt).

    Differentiates through the softmin gradient, the funnel error, and
    the state dependence of the actuation matrix (the rotation blocks
    of the omni team; orientation states are degrees).
    """
    x = np.asarray(x, dtype=float)
    rho, grad = smooth_psi_value_and_grad(psi, x, smoothing)
    hess = smooth_psi_hessian(psi, x, smoothing)
    gamma = gamma_at(fp.perf, t)
    xi = (rho - fp.rho_max) / gamma
    if not (-1.0 < xi < 0.0):
        raise FunnelViolation(xi, t)
    eps = math.log(-(xi + 1.0) / xi)
    slope = transform_slope(xi)
    deps_dx = slope * grad / gamma
    deps_dt = -slope * xi * gamma_rate(fp.perf, t) / gamma

    g = plant.g(x)
    gT_grad = g.T @ grad
    du_dx = -np.outer(gT_grad, deps_dx) - eps * (g.T @ hess)
    if plant.kernel_kind == 1:
        # d/d theta_a of rot(theta_a) @ gbase, theta in degrees.
        n_agents = plant.n // 3
        for a in range(n_agents):
            th = x[3 * a + 2] * _DEG
            c, s = math.cos(th), math.sin(th)
            drot = np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]]) * _DEG
            dg_block = drot @ plant.kernel_gbase
            block = dg_block.T @ grad[3 * a : 3 * a + 3]
            du_dx[3 * a : 3 * a + 3, 3 * a + 2] += -eps * block
    du_dt = -deps_dt * gT_grad
    return du_dx, du_dt


def _corners(x: np.ndarray, t: float, bx: float, bt: float, rng: np.random.Generator) -> np.ndarray:
    """Corner points of the box, capped by random subsampling."""
    dims = x.shape[0] + 1
    if 2**dims <= _CORNER_CAP:
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=dims)))
    else:
        signs = rng.choice((-1.0, 1.0), size=(_CORNER_CAP, dims))
    pts = np.empty_like(signs)
    pts[:, :-1] = x + signs[:, :-1] * bx
    # Time extends forward only: [t, t + bt].
    pts[:, -1] = t + (signs[:, -1] * 0.5 + 0.5) * bt
    return pts


def _probe_points(
    x: np.ndarray, t: float, bx: float, bt: float, tc: TriggerConfig, rng: np.random.Generator
) -> np.ndarray:
    dims = x.shape[0] + 1
    sobol = qmc.Sobol(d=dims, scramble=True, seed=int(rng.integers(2**32)))
    unit = sobol.random(tc.sample_count)
    pts = np.empty((tc.sample_count, dims))
    pts[:, :-1] = x + (2.0 * unit[:, :-1] - 1.0) * bx
    pts[:, -1] = t + unit[:, -1] * bt
    return np.vstack([pts, _corners(x, t, bx, bt, rng)])


def _batch_u_xi(
    pts: np.ndarray,
    psi: NonTemporalFormula,
    fp: FunnelParams,
    plant: Plant,
    smoothing: SmoothingConfig,
) -> tuple[np.ndarray, np.ndarray]:
    table = compile_leaf_table(psi)
    X = np.ascontiguousarray(pts[:, :-1])
    T = np.ascontiguousarray(pts[:, -1])
    U = np.empty((pts.shape[0], plant.m))
    XI = np.empty(pts.shape[0])
    kernels.u_xi_batch(
        *table.arrays(), X, T, smoothing.eta,
        fp.rho_max, fp.perf.gamma0, fp.perf.gamma_inf, fp.perf.l,
        plant.kernel_kind, plant.kernel_gain, plant.kernel_gbase, U, XI,
    )
    return U, XI


def compute_trigger_radius(
    x_i: np.ndarray,
    t_i: float,
    psi: NonTemporalFormula,
    fp: FunnelParams,
    plant: Plant,
    tc: TriggerConfig = TriggerConfig(),
    smoothing: SmoothingConfig = SmoothingConfig(),
    rng: np.random.Generator | None = None,
) -> float:
    """Trigger radius delta_i = min(delta_u / L_z, box_x, box_t).

    L_z conservatively estimates the Lipschitz constant of the law over
    the box B(x_i, box_x) x [t_i, t_i + box_t]: the max infinity-norm
    of central-difference Jacobians at quasi-random probes plus box
    corners, times a safety factor.  The box first shrinks until all
    probes keep xi inside (-1 + 1e-3, -1e-3); radii below
    ``delta_floor`` raise TriggerFloorError.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    x_i = np.asarray(x_i, dtype=float)
    bx, bt = tc.delta_x0, tc.delta_t0
    while True:
        pts = _probe_points(x_i, t_i, bx, bt, tc, rng)
        _, xi = _batch_u_xi(pts, psi, fp, plant, smoothing)
        if np.all((xi > -1.0 + _XI_GUARD) & (xi < -_XI_GUARD)):
            break
        bx *= tc.shrink
        bt *= tc.shrink
        if min(bx, bt) < tc.delta_floor:
            raise TriggerFloorError(
                t_i, f"no admissible box above {tc.delta_floor:g} (state near funnel boundary)"
            )

    dims = x_i.shape[0] + 1
    row_sums = np.zeros((pts.shape[0], plant.m))
    for k in range(dims):
        shift = np.zeros(dims)
        shift[k] = _FD_STEP
        u_plus, _ = _batch_u_xi(pts + shift, psi, fp, plant, smoothing)
        u_minus, _ = _batch_u_xi(pts - shift, psi, fp, plant, smoothing)
        row_sums += np.abs(u_plus - u_minus) / (2.0 * _FD_STEP)
    finite = np.isfinite(row_sums).all(axis=1)
    if not finite.any():
        raise TriggerFloorError(t_i, "all Lipschitz probes fell outside the funnel")
    l_z = float(row_sums[finite].max(axis=1).max()) * tc.lipschitz_safety
    delta = min(tc.delta_u / l_z if l_z > 0.0 else math.inf, bx, bt)
    if delta < tc.delta_floor:
        raise TriggerFloorError(t_i, f"delta {delta:.3g} below floor {tc.delta_floor:g}")
    return delta


def should_trigger(x: np.ndarray, t: float, cs: ControllerState) -> Cause | None:
    """Strict-inequality trigger test against the active event.

    StateDeviation takes precedence when both conditions exceed.
    """
    ev = cs.event
    if ev is None:
        raise ValueError("no active trigger event")
    if float(np.max(np.abs(np.asarray(x) - ev.x))) > ev.delta:
        return "StateDeviation"
    if t - ev.t > ev.delta:
        return "MaxInterval"
    return None


def held_input(cs: ControllerState) -> np.ndarray:
    """Zero-order-held input from the active event."""
    if cs.event is None:
        raise ValueError("no active trigger event")
    return cs.event.u


def make_event(
    cs: ControllerState,
    x: np.ndarray,
    t: float,
    index: int,
    cause: Cause,
    plant: Plant,
    tc: TriggerConfig,
    smoothing: SmoothingConfig = SmoothingConfig(),
    rng: np.random.Generator | None = None,
) -> TriggerEvent:
    """Refresh the controller at (x, t): new input snapshot and radius."""
    x = np.asarray(x, dtype=float)
    u = continuous_law(x, t, cs.psi, cs.fp, plant.g(x), smoothing)
    delta = compute_trigger_radius(x, t, cs.psi, cs.fp, plant, tc, smoothing, rng)
    event = TriggerEvent(index=index, t=t, x=x.copy(), u=u, delta=delta, cause=cause)
    cs.event = event
    return event
