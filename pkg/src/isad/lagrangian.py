"""Augmented Lagrangian pieces: surrogate, primal/dual updates, residuals.

One solver round performs, in order, a prox step on y against the freshest
operator estimate, a damped minimization step on x whose linear term still
uses the previous round's estimate, and an explicit dual step on z. The
functions here are pure given their inputs; a state is owned by exactly one
driver loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConfigurationError
from .objective import Bregman, ObjectiveModel, bounded_hessian_generator, bregman


@dataclass(frozen=True)
class SolverState:
    """Iterate record (x_t, y_t, z_t) with the penalty used this round."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    beta: float
    t: int = 0


@dataclass(frozen=True)
class KktResidual:
    """First-order criticality residuals against a reference operator mean.

    ``r_prox`` measures how far -z is from the subdifferential of the prox
    term at y (via the unit-step prox fixed point), ``r_grad`` the gradient
    condition on the smooth term, ``r_feas`` the coupling constraint.
    """

    r_prox: float
    r_grad: float
    r_feas: float


class XUpdate(NamedTuple):
    x: np.ndarray
    inner_iters: int
    grad_norm: float
    converged: bool


def eval_lagrangian(
    x, y, z, beta: float, A: np.ndarray, model: ObjectiveModel
) -> float:
    """Penalized Lagrangian h(x) + P(y) - <z, Ax - y> + beta/2 ||Ax - y||^2.

    Returns +inf when P(y) is +inf.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    residual = A @ x - y
    p_val = model.prox.value(y)
    if math.isinf(p_val):
        return math.inf
    return float(
        model.smooth.value(x)
        + p_val
        - z @ residual
        + 0.5 * beta * (residual @ residual)
    )


def eval_surrogate_g(
    x,
    state: SolverState,
    M_prev: np.ndarray,
    M_curr: np.ndarray,
    y_next,
    model: ObjectiveModel,
    phi: Bregman | None = None,
) -> float:
    """Surrogate minimized by the x-step.

    h(x) - <z_t, M_prev x> + beta/2 ||M_curr x - y_next||^2 + D_phi(x, x_t);
    the linear term deliberately uses the previous round's operator estimate
    while the quadratic uses the current one.
    """
    phi = phi if phi is not None else model.phi
    x = np.asarray(x, dtype=float)
    residual = M_curr @ x - np.asarray(y_next, dtype=float)
    return float(
        model.smooth.value(x)
        - state.z @ (M_prev @ x)
        + 0.5 * state.beta * (residual @ residual)
        + bregman(phi, x, state.x)
    )


def surrogate_grad(
    x,
    state: SolverState,
    M_prev: np.ndarray,
    M_curr: np.ndarray,
    y_next,
    model: ObjectiveModel,
    phi: Bregman | None = None,
) -> np.ndarray:
    phi = phi if phi is not None else model.phi
    x = np.asarray(x, dtype=float)
    residual = M_curr @ x - np.asarray(y_next, dtype=float)
    return (
        model.smooth.grad(x)
        - M_prev.T @ state.z
        + state.beta * (M_curr.T @ residual)
        + phi.grad(x)
        - phi.grad(state.x)
    )


def y_update(state: SolverState, M_curr: np.ndarray, model: ObjectiveModel) -> np.ndarray:
    """Prox step: argmin_y P(y) + <z_t, y> + beta/2 ||M_curr x_t - y||^2."""
    if state.beta <= 0:
        raise ConfigurationError("penalty must be positive")
    w = M_curr @ state.x - state.z / state.beta
    return model.prox.prox(1.0 / state.beta, w)


def x_update_closed_form(
    state: SolverState,
    M_prev: np.ndarray,
    M_curr: np.ndarray,
    y_next,
    model: ObjectiveModel,
) -> XUpdate:
    """Exact x-step for bounded-Hessian models with the canonical generator.

    Solves the normal system
        (beta M_curr^T M_curr + gamma I) x =
            M_prev^T z_t + beta M_curr^T y_next + gamma x_t - grad h(x_t)
    by a symmetric positive-definite factorization.
    """
    gamma = model.smooth.hessian_bound
    if gamma is None:
        raise ConfigurationError("closed-form x-step needs a Hessian bound")
    beta = state.beta
    n = state.x.size
    system = beta * (M_curr.T @ M_curr) + gamma * np.eye(n)
    rhs = (
        M_prev.T @ state.z
        + beta * (M_curr.T @ np.asarray(y_next, dtype=float))
        + gamma * state.x
        - model.smooth.grad(state.x)
    )
    factor = scipy.linalg.cho_factor(system, lower=True)
    x_new = scipy.linalg.cho_solve(factor, rhs)
    phi = bounded_hessian_generator(model.smooth)
    grad_norm = float(
        np.linalg.norm(surrogate_grad(x_new, state, M_prev, M_curr, y_next, model, phi))
    )
    return XUpdate(x=x_new, inner_iters=0, grad_norm=grad_norm, converged=True)


def x_update_general(
    state: SolverState,
    M_prev: np.ndarray,
    M_curr: np.ndarray,
    y_next,
    model: ObjectiveModel,
    phi: Bregman | None = None,
    inner_tol: float = 1e-8,
    max_inner: int = 10_000,
) -> XUpdate:
    """Backtracking gradient descent on the surrogate from the warm start x_t.

    Armijo rule with halving and slope 1e-4; candidates with non-finite
    surrogate value are rejected, which keeps iterates inside the smooth
    domain. Stops when the surrogate gradient norm drops below ``inner_tol``
    or the iteration budget runs out (the best iterate is then returned with
    ``converged=False``).
    """
    if inner_tol <= 0:
        raise ConfigurationError("inner tolerance must be positive")
    phi = phi if phi is not None else model.phi

    def g_val(v):
        return eval_surrogate_g(v, state, M_prev, M_curr, y_next, model, phi)

    def g_grad(v):
        return surrogate_grad(v, state, M_prev, M_curr, y_next, model, phi)

    x = np.array(state.x, dtype=float)
    fx = g_val(x)
    step = 1.0
    grad_norm = 0.0
    for it in range(max_inner):
        grad = g_grad(x)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= inner_tol:
            return XUpdate(x=x, inner_iters=it, grad_norm=grad_norm, converged=True)
        accepted = False
        while step >= 1e-20:
            candidate = x - step * grad
            f_candidate = g_val(candidate)
            if math.isfinite(f_candidate) and (
                f_candidate <= fx - 1e-4 * step * grad_norm * grad_norm
            ):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return XUpdate(x=x, inner_iters=it, grad_norm=grad_norm, converged=False)
        moved = step * grad_norm
        x = candidate
        fx = f_candidate
        if moved <= 1e-15 * (1.0 + float(np.linalg.norm(x))):
            # float64 cannot express further decrease of the surrogate value;
            # accepted steps below machine resolution are rounding noise
            grad_norm = float(np.linalg.norm(g_grad(x)))
            return XUpdate(
                x=x,
                inner_iters=it + 1,
                grad_norm=grad_norm,
                converged=grad_norm <= inner_tol,
            )
        step = min(step * 2.0, 1e12)
    grad_norm = float(np.linalg.norm(g_grad(x)))
    return XUpdate(
        x=x, inner_iters=max_inner, grad_norm=grad_norm, converged=grad_norm <= inner_tol
    )


def z_update(state: SolverState, M_curr: np.ndarray, y_next, x_next) -> np.ndarray:
    """Dual step z_{t+1} = z_t - beta (M_curr x_{t+1} - y_next)."""
    residual = M_curr @ np.asarray(x_next, dtype=float) - np.asarray(y_next, dtype=float)
    return state.z - state.beta * residual


def kkt_residual(
    state: SolverState, true_mean: np.ndarray, model: ObjectiveModel
) -> KktResidual:
    """Criticality residuals of (x, y, z) against the true operator mean."""
    x, y, z = state.x, state.y, state.z
    feas = true_mean @ x - y
    grad_gap = model.smooth.grad(x) - true_mean.T @ z
    prox_gap = y - model.prox.prox(1.0, y - z)
    return KktResidual(
        r_prox=float(np.linalg.norm(prox_gap)),
        r_grad=float(np.linalg.norm(grad_gap)),
        r_feas=float(np.linalg.norm(feas)),
    )
