"""Exception hierarchy for the stlfunnel package."""

from __future__ import annotations


class StlFunnelError(Exception):
    """Base class for all package-specific errors."""


class ParseError(StlFunnelError):
    """Formula text could not be parsed.

    Attributes:
        position: 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FormulaError(StlFunnelError):
    """A structurally valid parse produced a formula outside the supported fragment."""


class FunnelViolation(StlFunnelError):
    """The normalized error xi left the open interval (-1, 0).

    Raised when the tracked robustness touches or crosses a funnel
    boundary; the runtime guarantee no longer holds past this point.
    """

    def __init__(self, xi: float, t: float) -> None:
        super().__init__(f"funnel violated: xi={xi:.6g} at t={t:.6g}")
        self.xi = xi
        self.t = t


class SynthesisError(StlFunnelError):
    """Funnel parameter selection failed (infeasible task or bad overrides)."""


class OptimizationError(StlFunnelError):
    """Robustness maximization did not converge or detected an unbounded ascent."""


class TriggerFloorError(StlFunnelError):
    """No admissible trigger radius above the configured floor.

    Signals that the state is too close to a funnel boundary for any
    sampling box to fit; treated as a near-violation of the guarantee.
    """

    def __init__(self, t: float, detail: str) -> None:
        super().__init__(f"trigger radius below floor at t={t:.6g}: {detail}")
        self.t = t


class DeadlineError(StlFunnelError):
    """A task deadline passed without the satisfaction condition holding."""

    def __init__(self, task_index: int, t: float, rho: float) -> None:
        super().__init__(
            f"task {task_index} missed its deadline at t={t:.6g} (rho={rho:.6g})"
        )
        self.task_index = task_index
        self.t = t
        self.rho = rho


class WindowError(StlFunnelError):
    """Trajectory samples do not cover a temporal window being monitored."""


class ConfigError(StlFunnelError):
    """Scenario file failed validation."""
