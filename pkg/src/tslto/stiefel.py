"""Minimization of smooth objectives over matrices with orthonormal columns.

Feasible curvilinear search along the Cayley curve
Y(tau) = (I + tau/2 * A)^{-1} (I - tau/2 * A) U with A = G U^T - U G^T,
trial steps from alternating Barzilai-Borwein estimates, monotone Armijo
backtracking.  When 2r < D the Cayley solve uses the low-rank
Sherman-Morrison-Woodbury form instead of the dense D x D system.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tensor_ops import (
    frobenius_norm,
    mode_n_product,
    toeplitz_diff,
    toeplitz_diff_adjoint,
    unfold,
)

ARMIJO_C = 1e-4
BACKTRACK = 0.5
STEP_MIN = 1e-10
STEP_MAX = 1e10
MAX_BACKTRACKS = 30
ORTH_TOL = 1e-8
DRIFT_TOL = 1e-10


@dataclass
class SmoothObjective:
    """Objective/gradient pair; gradient is the Euclidean gradient."""

    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]


def orthonormality_error(u):
    u = np.asarray(u)
    return frobenius_norm(u.T @ u - np.eye(u.shape[1]))


def _reorthonormalize(u):
    q, r = np.linalg.qr(u)
    # Keep column orientation stable under the QR sign ambiguity.
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _cayley_step(u, g, tau):
    d, r = u.shape
    if 2 * r < d:
        # A = P Q^T with P = [G, U], Q = [U, -G]; solve the 2r x 2r system.
        p = np.hstack([g, u])
        q = np.hstack([u, -g])
        small = np.eye(2 * r) + (tau / 2.0) * (q.T @ p)
        return u - tau * p @ np.linalg.solve(small, q.T @ u)
    a = g @ u.T - u @ g.T
    lhs = np.eye(d) + (tau / 2.0) * a
    rhs = (np.eye(d) - (tau / 2.0) * a) @ u
    return np.linalg.solve(lhs, rhs)


def minimize_on_stiefel(obj, u0, max_iters=60):
    """Descend `obj` from a feasible point, staying on the manifold.

    Returns a point with objective value no larger than at u0.  Stops on
    max_iters, on a small Riemannian gradient (||A @ U||_F below
    1e-8 * (1 + ||u0||_F)), or when backtracking cannot find descent.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    u = np.asarray(u0, dtype=float)
    f = float(obj.evaluate(u))
    g = np.asarray(obj.gradient(u), dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValueError("non-finite objective or gradient at the initial point")
    grad_tol = 1e-8 * (1.0 + frobenius_norm(u))
    tau = 1e-2 / (1.0 + frobenius_norm(g))

    for it in range(max_iters):
        # A @ U without forming A densely.
        au = g @ (u.T @ u) - u @ (g.T @ u)
        au_norm = frobenius_norm(au)
        if au_norm <= grad_tol:
            break
        step = min(max(tau, STEP_MIN), STEP_MAX)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            u_new = _cayley_step(u, g, step)
            f_new = float(obj.evaluate(u_new))
            if np.isfinite(f_new) and f_new <= f - ARMIJO_C * step * au_norm**2:
                accepted = True
                break
            step *= BACKTRACK
        if not accepted:
            break
        g_new = np.asarray(obj.gradient(u_new), dtype=float)
        if not np.all(np.isfinite(g_new)):
            raise ValueError("non-finite gradient during the manifold search")
        s = u_new - u
        y = g_new - g
        sy = abs(float(np.vdot(s, y)))
        if sy > 0:
            if it % 2 == 0:
                tau = float(np.vdot(s, s)) / sy
            else:
                yy = float(np.vdot(y, y))
                tau = sy / yy if yy > 0 else tau
        else:
            # no curvature information (e.g. constant gradient): grow the
            # accepted step instead of freezing at the initial scale
            tau = min(2.0 * step, STEP_MAX)
        u, f, g = u_new, f_new, g_new
        if orthonormality_error(u) > DRIFT_TOL:
            u = _reorthonormalize(u)
            f = float(obj.evaluate(u))
            g = np.asarray(obj.gradient(u), dtype=float)
    return u


def factor_coefficient(g_core, u1, u2, u3, mode):
    """Matrix M with unfold(reconstruction, mode) == U_mode @ M.

    The Kronecker factor of the unfolded Tucker form is applied through mode
    products, never materialized.
    """
    if mode == 1:
        t = mode_n_product(mode_n_product(g_core, u2, 2), u3, 3)
    elif mode == 2:
        t = mode_n_product(mode_n_product(g_core, u1, 1), u3, 3)
    elif mode == 3:
        t = mode_n_product(mode_n_product(g_core, u1, 1), u2, 2)
    else:
        raise ValueError(f"invalid mode {mode!r}")
    return unfold(t, mode)


def grad_fbeta_U(g_core, u1, u2, u3, l, beta, mode):
    """Gradient of (beta/2) * ||reconstruction - L||_F^2 w.r.t. factor `mode`."""
    us = {1: u1, 2: u2, 3: u3}
    m = factor_coefficient(g_core, u1, u2, u3, mode)
    residual = us[mode] @ m - unfold(l, mode)
    return beta * residual @ m.T


def grad_U_subproblem(g_core, u1, u2, u3, l, beta, mode, y, v, alpha):
    """Full factor-subproblem gradient including the multiplier terms."""
    us = {1: u1, 2: u2, 3: u3}
    grad = grad_fbeta_U(g_core, u1, u2, u3, l, beta, mode)
    return grad - toeplitz_diff_adjoint(v + alpha * (y - toeplitz_diff(us[mode])))
