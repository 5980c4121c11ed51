"""Leaf predicate values, gradients, and Hessians."""

import numpy as np
import pytest

from stlfunnel.predicates import (
    affine,
    ball,
    join,
    predicate_hessian,
    predicate_value_and_grad,
)
from conftest import brute_leaf, central_diff


def test_ball_value_and_grad():
    p = ball((0, 1), (3.0, 4.0), 2.0)
    x = np.array([0.0, 0.0, 7.0])
    h, g = predicate_value_and_grad(p, x)
    assert h == pytest.approx(2.0 - 5.0)
    # Unit vector from x toward the center.
    assert g == pytest.approx(np.array([3.0 / 5.0, 4.0 / 5.0, 0.0]))


def test_ball_grad_zero_at_center():
    p = ball((0,), (1.0,), 0.5)
    h, g = predicate_value_and_grad(p, np.array([1.0, 9.0]))
    assert h == pytest.approx(0.5)
    assert np.all(g == 0.0)
    assert np.all(predicate_hessian(p, np.array([1.0, 9.0])) == 0.0)


def test_join_value_and_grad():
    p = join((0, 1), (2, 3), 10.0)
    x = np.array([0.0, 0.0, 3.0, 4.0])
    h, g = predicate_value_and_grad(p, x)
    assert h == pytest.approx(5.0)
    assert g == pytest.approx(np.array([0.6, 0.8, -0.6, -0.8]))


def test_affine_value_and_grad():
    p = affine((0, 2), (2.0, -1.0), 4.0)
    x = np.array([1.0, 5.0, 3.0])
    h, g = predicate_value_and_grad(p, x)
    assert h == pytest.approx(4.0 - 2.0 + 3.0)
    assert g == pytest.approx(np.array([-2.0, 0.0, 1.0]))


def test_negation_flips_value_grad_hessian(rng):
    p = ball((0, 1), (1.0, -2.0), 3.0)
    x = rng.uniform(-5, 5, 4)
    h, g = predicate_value_and_grad(p, x)
    hn, gn = predicate_value_and_grad(p.negate(), x)
    assert hn == pytest.approx(-h)
    assert gn == pytest.approx(-g)
    assert predicate_hessian(p.negate(), x) == pytest.approx(-predicate_hessian(p, x))


@pytest.mark.parametrize(
    "p",
    [
        ball((0, 2), (1.0, -1.0), 2.5),
        join((0, 1), (2, 3), 4.0),
        affine((1, 3), (0.5, -2.0), 1.0),
        ball((0, 1, 2, 3), (0.0, 1.0, 2.0, 3.0), 5.0).negate(),
    ],
)
def test_grad_matches_finite_differences(p, rng):
    for _ in range(10):
        x = rng.uniform(-4, 4, 4)
        h, g = predicate_value_and_grad(p, x)
        assert h == pytest.approx(brute_leaf(p, x), rel=1e-12, abs=1e-12)
        fd = central_diff(lambda y: predicate_value_and_grad(p, y)[0], x)
        assert g == pytest.approx(fd, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize(
    "p",
    [
        ball((0, 2), (1.0, -1.0), 2.5),
        join((0, 1), (2, 3), 4.0),
        affine((1, 3), (0.5, -2.0), 1.0),
    ],
)
def test_hessian_matches_finite_differences(p, rng):
    for _ in range(5):
        x = rng.uniform(-4, 4, 4)
        hess = predicate_hessian(p, x)
        assert hess == pytest.approx(hess.T)
        for i in range(4):
            e = np.zeros(4)
            e[i] = 1e-5
            row_fd = (
                predicate_value_and_grad(p, x + e)[1]
                - predicate_value_and_grad(p, x - e)[1]
            ) / 2e-5
            assert hess[i] == pytest.approx(row_fd, rel=1e-4, abs=1e-6)


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        ball((0, 1), (1.0,), 2.0)
    with pytest.raises(ValueError):
        join((0, 1), (2,), 2.0)
    with pytest.raises(ValueError):
        affine((0,), (1.0, 2.0), 0.0)


def test_min_dim():
    assert ball((0, 4), (0.0, 0.0), 1.0).min_dim == 5
    assert join((0,), (7,), 1.0).min_dim == 8
    assert affine((2,), (1.0,), 0.0).min_dim == 3
