"""Concave predicate primitives over selected state components.

Three leaf kinds cover the supported fragment:

* ``ball``:   h(x) = radius - ||x[sel] - center||_2
* ``join``:   h(x) = radius - ||x[sel_a] - x[sel_b]||_2
* ``affine``: h(x) = offset - sum(coeffs * x[sel])

A band constraint ``|x_k - c| < w`` is desugared by the parser into two
affine leaves and never reaches this module as its own kind.  Negation
flips the sign of value, gradient, and Hessian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PredicateSpec", "ball", "join", "affine", "predicate_value_and_grad"]


@dataclass(frozen=True)
class PredicateSpec:
    """One leaf predicate, possibly negated.

    Fields are tuples so specs are hashable and safely shared.
    ``sel_b`` is only used by ``join``; ``coeffs`` only by ``affine``.
    """

    kind: str
    sel: tuple[int, ...]
    sel_b: tuple[int, ...] = ()
    center: tuple[float, ...] = ()
    coeffs: tuple[float, ...] = ()
    radius: float = 0.0
    offset: float = 0.0
    negated: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("ball", "join", "affine"):
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        if self.kind == "ball" and len(self.sel) != len(self.center):
            raise ValueError("ball selector and center lengths differ")
        if self.kind == "join" and len(self.sel) != len(self.sel_b):
            raise ValueError("join selector lengths differ")
        if self.kind == "affine" and len(self.sel) != len(self.coeffs):
            raise ValueError("affine selector and coefficient lengths differ")

    @property
    def min_dim(self) -> int:
        """Smallest state dimension this predicate can be evaluated on."""
        return 1 + max(self.sel + self.sel_b, default=-1)

    @property
    def concave(self) -> bool:
        """True when the signed leaf is concave in x."""
        return self.kind == "affine" or not self.negated

    def negate(self) -> "PredicateSpec":
        return PredicateSpec(
            kind=self.kind,
            sel=self.sel,
            sel_b=self.sel_b,
            center=self.center,
            coeffs=self.coeffs,
            radius=self.radius,
            offset=self.offset,
            negated=not self.negated,
        )


def ball(sel: tuple[int, ...], center: tuple[float, ...], radius: float) -> PredicateSpec:
    return PredicateSpec(kind="ball", sel=tuple(sel), center=tuple(center), radius=float(radius))


def join(sel_a: tuple[int, ...], sel_b: tuple[int, ...], radius: float) -> PredicateSpec:
    return PredicateSpec(kind="join", sel=tuple(sel_a), sel_b=tuple(sel_b), radius=float(radius))


def affine(sel: tuple[int, ...], coeffs: tuple[float, ...], offset: float) -> PredicateSpec:
    return PredicateSpec(
        kind="affine", sel=tuple(sel), coeffs=tuple(float(c) for c in coeffs), offset=float(offset)
    )


def predicate_value_and_grad(p: PredicateSpec, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed leaf value and its gradient with respect to the full state.

    The gradient of a norm at its own center is taken as the zero vector;
    any subgradient is admissible there and zero keeps the control law
    continuous through the center.
    """
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    if p.kind == "affine":
        h = p.offset - float(np.dot(p.coeffs, x[list(p.sel)]))
        grad[list(p.sel)] = [-c for c in p.coeffs]
    elif p.kind == "ball":
        d = x[list(p.sel)] - np.asarray(p.center)
        nd = float(np.linalg.norm(d))
        h = p.radius - nd
        if nd > 0.0:
            grad[list(p.sel)] = -d / nd
    else:
        d = x[list(p.sel)] - x[list(p.sel_b)]
        nd = float(np.linalg.norm(d))
        h = p.radius - nd
        if nd > 0.0:
            grad[list(p.sel)] = -d / nd
            grad[list(p.sel_b)] = d / nd
    if p.negated:
        return -h, -grad
    return h, grad


def predicate_hessian(p: PredicateSpec, x: np.ndarray) -> np.ndarray:
    """Signed leaf Hessian; zero at a norm center by the same convention."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    hess = np.zeros((n, n))
    if p.kind == "affine":
        return hess
    sel = list(p.sel)
    if p.kind == "ball":
        d = x[sel] - np.asarray(p.center)
        nd = float(np.linalg.norm(d))
        if nd > 0.0:
            u = d / nd
            block = -(np.eye(len(sel)) - np.outer(u, u)) / nd
            hess[np.ix_(sel, sel)] = block
    else:
        sel_b = list(p.sel_b)
        d = x[sel] - x[sel_b]
        nd = float(np.linalg.norm(d))
        if nd > 0.0:
            u = d / nd
            block = -(np.eye(len(sel)) - np.outer(u, u)) / nd
            hess[np.ix_(sel, sel)] = block
            hess[np.ix_(sel_b, sel_b)] = block
            hess[np.ix_(sel, sel_b)] = -block
            hess[np.ix_(sel_b, sel)] = -block
    if p.negated:
        return -hess
    return hess
