"""Hot numeric kernels with a numba fast path and a numpy fallback.

The fallback is selected when numba is unavailable or when the
environment variable ``STLFUNNEL_NO_NUMBA`` is set to a non-empty
value; ``USING_NUMBA`` reports which path is active.  Both paths share
the flat leaf-table encoding:

* ``kinds``: int64, 0 = affine, 1 = ball, 2 = join
* ``signs``: float64, -1.0 for negated leaves
* ``sels`` / ``selbs``: int64 (n_leaves, width), -1 padded
* ``pars``: float64 (n_leaves, width) - centers or coefficients
* ``csts``: float64 - radius or offset

Plant kinds understood by the input-law kernels: 0 is a scaled identity
actuation (gain passed separately), 1 is the three-wheel omni team
whose per-agent actuation is a planar rotation of ``gbase`` with the
orientation state held in degrees.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "leaf_values",
    "smooth_rho_grad",
    "u_xi_eval",
    "u_xi_batch",
]

_DEG = math.pi / 180.0


# ---------------------------------------------------------------------------
# reference numpy implementations


def _leaf_values_np(kinds, signs, sels, selbs, pars, csts, x, out):
    for i in range(kinds.shape[0]):
        width = sels.shape[1]
        if kinds[i] == 0:
            acc = 0.0
            for j in range(width):
                if sels[i, j] < 0:
                    break
                acc += pars[i, j] * x[sels[i, j]]
            h = csts[i] - acc
        elif kinds[i] == 1:
            acc = 0.0
            for j in range(width):
                if sels[i, j] < 0:
                    break
                d = x[sels[i, j]] - pars[i, j]
                acc += d * d
            h = csts[i] - math.sqrt(acc)
        else:
            acc = 0.0
            for j in range(width):
                if sels[i, j] < 0:
                    break
                d = x[sels[i, j]] - x[selbs[i, j]]
                acc += d * d
            h = csts[i] - math.sqrt(acc)
        out[i] = signs[i] * h
    return out


def _smooth_rho_grad_np(kinds, signs, sels, selbs, pars, csts, x, eta, grad_out):
    n_leaves = kinds.shape[0]
    width = sels.shape[1]
    h = np.empty(n_leaves)
    _leaf_values_np(kinds, signs, sels, selbs, pars, csts, x, h)
    m = h.min()
    w = np.exp(-eta * (h - m))
    z = w.sum()
    rho = m - math.log(z) / eta
    w /= z
    grad_out[:] = 0.0
    for i in range(n_leaves):
        wi = w[i]
        if kinds[i] == 0:
            for j in range(width):
                if sels[i, j] < 0:
                    break
                grad_out[sels[i, j]] -= wi * signs[i] * pars[i, j]
        elif kinds[i] == 1:
            acc = 0.0
            for j in range(width):
                if sels[i, j] < 0:
                    break
                d = x[sels[i, j]] - pars[i, j]
                acc += d * d
            nd = math.sqrt(acc)
            if nd > 0.0:
                for j in range(width):
                    if sels[i, j] < 0:
                        break
                    d = x[sels[i, j]] - pars[i, j]
                    grad_out[sels[i, j]] -= wi * signs[i] * d / nd
        else:
            acc = 0.0
            for j in range(width):
                if sels[i, j] < 0:
                    break
                d = x[sels[i, j]] - x[selbs[i, j]]
                acc += d * d
            nd = math.sqrt(acc)
            if nd > 0.0:
                for j in range(width):
                    if sels[i, j] < 0:
                        break
                    d = x[sels[i, j]] - x[selbs[i, j]]
                    grad_out[sels[i, j]] -= wi * signs[i] * d / nd
                    grad_out[selbs[i, j]] += wi * signs[i] * d / nd
    return rho


def _apply_gT_np(plant_kind, gain, gbase, x, grad, u_out):
    """u_out = g(x)^T grad for the supported plant kinds."""
    n = x.shape[0]
    if plant_kind == 0:
        for k in range(n):
            u_out[k] = gain * grad[k]
        return
    n_agents = n // 3
    for a in range(n_agents):
        th = x[3 * a + 2] * _DEG
        c = math.cos(th)
        s = math.sin(th)
        gx = grad[3 * a]
        gy = grad[3 * a + 1]
        gw = grad[3 * a + 2]
        # rot(th)^T applied to the state-space gradient block
        v0 = c * gx + s * gy
        v1 = -s * gx + c * gy
        v2 = gw
        for j in range(3):
            u_out[3 * a + j] = gbase[0, j] * v0 + gbase[1, j] * v1 + gbase[2, j] * v2


def _u_xi_eval_np(
    kinds, signs, sels, selbs, pars, csts,
    x, t, eta, rho_max, g0, ginf, l,
    plant_kind, gain, gbase, u_out,
):
    grad = np.zeros_like(x)
    rho = _smooth_rho_grad_np(kinds, signs, sels, selbs, pars, csts, x, eta, grad)
    gamma = (g0 - ginf) * math.exp(-l * t) + ginf
    xi = (rho - rho_max) / gamma
    if xi <= -1.0 or xi >= 0.0:
        u_out[:] = np.nan
        return xi
    eps = math.log(-(xi + 1.0) / xi)
    _apply_gT_np(plant_kind, gain, gbase, x, grad, u_out)
    u_out *= -eps
    return xi


def _u_xi_batch_np(
    kinds, signs, sels, selbs, pars, csts,
    X, T, eta, rho_max, g0, ginf, l,
    plant_kind, gain, gbase, U_out, XI_out,
):
    """Vectorized twin of the batch kernel; loops only over leaves."""
    P, n = X.shape
    L = kinds.shape[0]
    H = np.empty((P, L))
    G = np.zeros((P, n))
    diffs = []
    for i in range(L):
        sel = sels[i][sels[i] >= 0]
        if kinds[i] == 0:
            H[:, i] = csts[i] - X[:, sel] @ pars[i, : sel.size]
            diffs.append(None)
        else:
            if kinds[i] == 1:
                D = X[:, sel] - pars[i, : sel.size]
            else:
                selb = selbs[i][selbs[i] >= 0]
                D = X[:, sel] - X[:, selb]
            nd = np.sqrt(np.einsum("pj,pj->p", D, D))
            H[:, i] = csts[i] - nd
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(nd[:, None] > 0.0, D / nd[:, None], 0.0)
            diffs.append(unit)
    H *= signs
    m = H.min(axis=1)
    W = np.exp(-eta * (H - m[:, None]))
    Z = W.sum(axis=1)
    rho = m - np.log(Z) / eta
    W /= Z[:, None]
    for i in range(L):
        sel = sels[i][sels[i] >= 0]
        wi = (W[:, i] * signs[i])[:, None]
        if kinds[i] == 0:
            np.add.at(G, (slice(None), sel), -wi * pars[i, : sel.size])
        else:
            np.add.at(G, (slice(None), sel), -wi * diffs[i])
            if kinds[i] == 2:
                selb = selbs[i][selbs[i] >= 0]
                np.add.at(G, (slice(None), selb), wi * diffs[i])
    gamma = (g0 - ginf) * np.exp(-l * T) + ginf
    XI_out[:] = (rho - rho_max) / gamma
    ok = (XI_out > -1.0) & (XI_out < 0.0)
    eps = np.zeros(P)
    eps[ok] = np.log(-(XI_out[ok] + 1.0) / XI_out[ok])
    if plant_kind == 0:
        U_out[:] = gain * G
    else:
        n_agents = n // 3
        for a in range(n_agents):
            th = X[:, 3 * a + 2] * _DEG
            c = np.cos(th)
            s = np.sin(th)
            v0 = c * G[:, 3 * a] + s * G[:, 3 * a + 1]
            v1 = -s * G[:, 3 * a] + c * G[:, 3 * a + 1]
            v2 = G[:, 3 * a + 2]
            for j in range(3):
                U_out[:, 3 * a + j] = gbase[0, j] * v0 + gbase[1, j] * v1 + gbase[2, j] * v2
    U_out *= np.where(ok, -eps, np.nan)[:, None]


# ---------------------------------------------------------------------------
# path selection

_numba_disabled = bool(os.environ.get("STLFUNNEL_NO_NUMBA"))
USING_NUMBA = False

if not _numba_disabled:
    try:
        from numba import njit, prange
    except ImportError:
        pass
    else:
        _jit = njit(cache=True, fastmath=False)
        leaf_values = _jit(_leaf_values_np)
        # Rebind the helper globals so the compiled callers resolve to
        # the jitted dispatchers instead of the plain functions.
        _leaf_values_np = leaf_values
        smooth_rho_grad = _jit(_smooth_rho_grad_np)
        _apply_gT = _jit(_apply_gT_np)

        @njit(cache=True)
        def u_xi_eval(
            kinds, signs, sels, selbs, pars, csts,
            x, t, eta, rho_max, g0, ginf, l,
            plant_kind, gain, gbase, u_out,
        ):
            grad = np.zeros_like(x)
            rho = smooth_rho_grad(kinds, signs, sels, selbs, pars, csts, x, eta, grad)
            gamma = (g0 - ginf) * math.exp(-l * t) + ginf
            xi = (rho - rho_max) / gamma
            if xi <= -1.0 or xi >= 0.0:
                u_out[:] = np.nan
                return xi
            eps = math.log(-(xi + 1.0) / xi)
            _apply_gT(plant_kind, gain, gbase, x, grad, u_out)
            for k in range(u_out.shape[0]):
                u_out[k] = -eps * u_out[k]
            return xi

        @njit(cache=True, parallel=True)
        def u_xi_batch(
            kinds, signs, sels, selbs, pars, csts,
            X, T, eta, rho_max, g0, ginf, l,
            plant_kind, gain, gbase, U_out, XI_out,
        ):
            for p in prange(X.shape[0]):
                XI_out[p] = u_xi_eval(
                    kinds, signs, sels, selbs, pars, csts,
                    X[p], T[p], eta, rho_max, g0, ginf, l,
                    plant_kind, gain, gbase, U_out[p],
                )

        USING_NUMBA = True

if not USING_NUMBA:
    leaf_values = _leaf_values_np
    smooth_rho_grad = _smooth_rho_grad_np
    u_xi_eval = _u_xi_eval_np
    u_xi_batch = _u_xi_batch_np
