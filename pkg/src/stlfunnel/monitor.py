"""Exact robustness monitoring over sampled trajectories.

Temporal windows are evaluated over the samples whose timestamps fall
in the closed interval [t+a, t+b].  Coverage rules:

* the window start must lie inside the sampled span and the window must
  contain at least one sample, otherwise the value is undefined;
* an Always window must additionally be covered through its end, since
  a truncated minimum would overestimate;
* an Eventually window may be truncated by an early-stopped run: the
  max over the recorded samples is a sound lower bound and constitutes
  the run's satisfaction evidence.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .errors import WindowError
from .formulas import SequentialFormula, TemporalFormula, normalize_sequential
from .robustness import exact_psi_batch

if TYPE_CHECKING:
    from .sim import Trajectory

__all__ = ["monitor_robustness"]


def _window_values(
    times: np.ndarray, values: np.ndarray, lo: float, hi: float, closed_end: bool
) -> np.ndarray:
    if times[0] > lo + 1e-12:
        raise WindowError(f"window start {lo:.6g} precedes first sample {times[0]:.6g}")
    if closed_end and times[-1] < hi - 1e-12:
        raise WindowError(f"window end {hi:.6g} exceeds last sample {times[-1]:.6g}")
    mask = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    if not mask.any():
        raise WindowError(f"no samples inside window [{lo:.6g}, {hi:.6g}]")
    return values[mask]


def monitor_robustness(
    f: TemporalFormula | SequentialFormula, traj: "Trajectory", t: float
) -> float:
    """Exact robustness of a temporal formula over a sampled trajectory.

    Evaluates the min/max composition of exact conjunction robustness
    over the trajectory samples: Always takes the window minimum,
    Eventually the window maximum, and a sequential formula the minimum
    over its atomic tasks.  Chains are evaluated through their
    cumulative-window normalization.
    """
    times = np.asarray(traj.t, dtype=float)
    if f.__class__ is TemporalFormula:
        atoms = [(f.op, f.a, f.b, f.psi)]
    else:
        atoms = [
            ("G" if task.m == 1 else "F", task.window[0], task.window[1], task.psi)
            for task in normalize_sequential(f)
        ]
    value = np.inf
    for op, a, b, psi in atoms:
        rho = exact_psi_batch(psi, np.asarray(traj.X, dtype=float))
        window = _window_values(times, rho, t + a, t + b, closed_end=(op == "G"))
        atom_value = window.min() if op == "G" else window.max()
        value = min(value, atom_value)
    return float(value)
