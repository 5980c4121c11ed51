"""Shared fixtures and independent brute-force oracles.

The oracles here recompute every quantity from first principles with
plain numpy so library results are checked against code that shares no
implementation with the package.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from stlfunnel.formulas import NonTemporalFormula
from stlfunnel.predicates import PredicateSpec, affine, ball, join

PSI1_TEXT = (
    "ball(0,1;20,30;10) and ball(3,4;40,60;10) and ball(6,7;60,30;10) "
    "and join(0,1;6,7;30) and ball(2;45;5) and ball(5;45;5) and ball(8;45;5)"
)
PSI2_TEXT = (
    "ball(0,1;90,90;10) and join(0,1;3,4;10) and join(3,4;6,7;10) "
    "and ball(2;45;5) and ball(5;45;5) and ball(8;45;5)"
)
THETA_TEXT = f"F[0,50] ({PSI1_TEXT}) and F[50,100] ({PSI2_TEXT})"


def brute_leaf(leaf: PredicateSpec, x: np.ndarray) -> float:
    """Leaf value computed directly from its definition."""
    if leaf.kind == "affine":
        h = leaf.offset - sum(c * x[i] for c, i in zip(leaf.coeffs, leaf.sel))
    elif leaf.kind == "ball":
        h = leaf.radius - math.sqrt(
            sum((x[i] - c) ** 2 for i, c in zip(leaf.sel, leaf.center))
        )
    else:
        h = leaf.radius - math.sqrt(
            sum((x[i] - x[j]) ** 2 for i, j in zip(leaf.sel, leaf.sel_b))
        )
    return -h if leaf.negated else h


def brute_exact(psi: NonTemporalFormula, x: np.ndarray) -> float:
    return min(brute_leaf(leaf, x) for leaf in psi.leaves)


def brute_smooth(psi: NonTemporalFormula, x: np.ndarray, eta: float) -> float:
    """Log-sum-exp soft minimum evaluated in extended precision."""
    hs = [brute_leaf(leaf, x) for leaf in psi.leaves]
    acc = math.fsum(math.exp(-eta * h) for h in hs)
    return -math.log(acc) / eta


def central_diff(fn, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


def random_concave_psi(
    rng: np.random.Generator, dim: int, n_leaves: int | None = None
) -> NonTemporalFormula:
    """Random well-posed conjunction of concave leaves on a dim state."""
    if n_leaves is None:
        n_leaves = int(rng.integers(1, 6))
    leaves = []
    # First leaf is always a ball so the conjunction is well posed.
    k = int(rng.integers(1, dim + 1))
    sel = tuple(int(i) for i in rng.choice(dim, size=k, replace=False))
    center = tuple(float(c) for c in rng.uniform(-10, 10, k))
    leaves.append(ball(sel, center, float(rng.uniform(0.5, 10.0))))
    for _ in range(n_leaves - 1):
        kind = rng.choice(["ball", "join", "affine"])
        if kind == "ball":
            k = int(rng.integers(1, dim + 1))
            sel = tuple(int(i) for i in rng.choice(dim, size=k, replace=False))
            center = tuple(float(c) for c in rng.uniform(-10, 10, k))
            leaves.append(ball(sel, center, float(rng.uniform(0.5, 10.0))))
        elif kind == "join" and dim >= 2:
            k = int(rng.integers(1, dim // 2 + 1))
            picks = rng.choice(dim, size=2 * k, replace=False)
            sel_a = tuple(int(i) for i in picks[:k])
            sel_b = tuple(int(i) for i in picks[k:])
            leaves.append(join(sel_a, sel_b, float(rng.uniform(0.5, 10.0))))
        else:
            k = int(rng.integers(1, dim + 1))
            sel = tuple(int(i) for i in rng.choice(dim, size=k, replace=False))
            coeffs = tuple(float(c) for c in rng.uniform(-2, 2, k))
            if all(c == 0.0 for c in coeffs):
                coeffs = (1.0,) + coeffs[1:]
            leaves.append(affine(sel, coeffs, float(rng.uniform(-5, 5))))
    psi = NonTemporalFormula(leaves=tuple(leaves))
    psi.validate()
    return psi


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
