"""Penalty oracles and empirical Lipschitz tracking.

Two interchangeable rules adjust the penalty: a closed-form rule for models
with a known Hessian bound (the penalty jumps straight to a target window
determined by the bound and the estimated smallest Gram eigenvalue) and a
doubling rule for the general case driven by running difference-quotient
trackers of the relevant gradient maps.

The doubling rule stores squared difference quotients in its trackers; the
unsquared suprema are kept alongside as shadow values for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .sampling import min_eig_gram

SIGMA_FLOOR = 1e-12
# Steps below this relative size are treated as a stalled x: difference
# quotients of surrogate values are dominated by rounding there.
STALL_TOL = 1e-6


@dataclass(frozen=True)
class ELipEstimate:
    """Supremum of difference quotients of a map along an iterate sequence.

    Never exceeds a global Lipschitz constant of the map when one exists.
    """

    value: float


def empirical_lipschitz(pairs) -> ELipEstimate:
    """Estimate from (F(x_next), F(x_prev), x_next, x_prev) tuples.

    Pairs with identical points are skipped; all-identical input gives 0.
    """
    best = 0.0
    for f_next, f_prev, x_next, x_prev in pairs:
        dx = float(np.linalg.norm(np.asarray(x_next) - np.asarray(x_prev)))
        if dx == 0.0:
            continue
        df = float(np.linalg.norm(np.asarray(f_next) - np.asarray(f_prev)))
        best = max(best, df / dx)
    return ELipEstimate(best)


@dataclass(frozen=True)
class OracleState:
    """Penalty plus running gradient difference-quotient trackers.

    ``zeta``/``xi`` hold squared quotients of grad(h)+grad(phi) and grad(phi)
    (the quantities the doubling rule tests); ``zeta_shadow``/``xi_shadow``
    hold the unsquared suprema. All four are nondecreasing. ``beta`` only
    doubles under the general rule and only moves via the closed form under
    the bounded rule.
    """

    beta: float
    zeta: float = 0.0
    xi: float = 0.0
    zeta_shadow: float = 0.0
    xi_shadow: float = 0.0
    update_count: int = 0
    last_update_round: Optional[int] = None


def _tracked(
    state: OracleState,
    x_next,
    x_prev,
    grad_sum_next,
    grad_sum_prev,
    grad_phi_next,
    grad_phi_prev,
    stall_tol: float,
):
    """Fold one step into the trackers; None step size means a stalled x."""
    dx = float(np.linalg.norm(np.asarray(x_next) - np.asarray(x_prev)))
    if dx <= stall_tol * (1.0 + float(np.linalg.norm(np.asarray(x_prev)))):
        return state, None
    q_sum = float(np.linalg.norm(np.asarray(grad_sum_next) - np.asarray(grad_sum_prev))) / dx
    q_phi = float(np.linalg.norm(np.asarray(grad_phi_next) - np.asarray(grad_phi_prev))) / dx
    updated = replace(
        state,
        zeta=max(state.zeta, q_sum * q_sum),
        xi=max(state.xi, q_phi * q_phi),
        zeta_shadow=max(state.zeta_shadow, q_sum),
        xi_shadow=max(state.xi_shadow, q_phi),
    )
    return updated, dx * dx


def apo_b(beta: float, M_curr: np.ndarray, gamma: float, eps: float) -> float:
    """Closed-form penalty rule for bounded-Hessian models.

    With sigma_t the smallest Gram eigenvalue of the operator estimate: keep
    beta while sigma_t beta + gamma sits inside the window
    ((1 + eps/2) 24 gamma / (sigma_t beta), (1 + 2 eps) 24 gamma / (sigma_t beta));
    otherwise jump to the positive root of
    sigma_t beta + gamma = (1 + eps) 24 gamma / (sigma_t beta). A singular
    estimate leaves beta untouched.
    """
    if gamma <= 0 or eps <= 0:
        raise ValueError("gamma and eps must be positive")
    sigma_t = min_eig_gram(M_curr)
    if sigma_t <= SIGMA_FLOOR:
        return beta
    pivot = sigma_t * beta + gamma
    lo = (1.0 + 0.5 * eps) * 24.0 * gamma / (sigma_t * beta)
    hi = (1.0 + 2.0 * eps) * 24.0 * gamma / (sigma_t * beta)
    if lo < pivot < hi:
        return beta
    return (-gamma + math.sqrt(gamma * gamma + (1.0 + eps) * 96.0 * gamma)) / (
        2.0 * sigma_t
    )


def apo_b_step(
    state: OracleState,
    x_next,
    x_prev,
    grad_sum_next,
    grad_sum_prev,
    grad_phi_next,
    grad_phi_prev,
    M_curr: np.ndarray,
    gamma: float,
    eps: float,
    round_index: int,
    stall_tol: float = STALL_TOL,
) -> OracleState:
    """Bounded-Hessian oracle step with shadow tracker maintenance."""
    state, _ = _tracked(
        state,
        x_next,
        x_prev,
        grad_sum_next,
        grad_sum_prev,
        grad_phi_next,
        grad_phi_prev,
        stall_tol,
    )
    new_beta = apo_b(state.beta, M_curr, gamma, eps)
    if new_beta != state.beta:
        return replace(
            state,
            beta=new_beta,
            update_count=state.update_count + 1,
            last_update_round=round_index,
        )
    return state


def general_apo(
    x_next,
    x_prev,
    state: OracleState,
    eps: float,
    M_curr: np.ndarray,
    g_at_next: float,
    g_at_prev: float,
    grad_sum_next,
    grad_sum_prev,
    grad_phi_next,
    grad_phi_prev,
    round_index: int = 0,
    stall_tol: float = STALL_TOL,
) -> OracleState:
    """Doubling penalty rule for the general case.

    Updates the difference-quotient trackers from the step, then tests the
    normalized surrogate decrease
        rho = -2 (g(x_next) - g(x_prev)) / ||x_next - x_prev||^2
    against 4 * 8 (zeta + xi + eps) / (beta sigma_t); beta doubles whenever
    the test fails. Stalled steps leave everything unchanged; a singular
    operator estimate keeps beta. Identical iterates with different surrogate
    values are inconsistent inputs.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if np.array_equal(np.asarray(x_next), np.asarray(x_prev)):
        if g_at_next != g_at_prev:
            raise ValueError(
                "identical iterates with different surrogate values: the "
                "decrease ratio is undefined"
            )
        return state
    state, dx_sq = _tracked(
        state,
        x_next,
        x_prev,
        grad_sum_next,
        grad_sum_prev,
        grad_phi_next,
        grad_phi_prev,
        stall_tol,
    )
    if dx_sq is None:
        return state
    sigma_t = min_eig_gram(M_curr)
    if sigma_t <= SIGMA_FLOOR:
        return state
    rho = -2.0 * (g_at_next - g_at_prev) / dx_sq
    if 0.25 * rho > 8.0 * (state.zeta + state.xi + eps) / (state.beta * sigma_t):
        return state
    return replace(
        state,
        beta=2.0 * state.beta,
        update_count=state.update_count + 1,
        last_update_round=round_index,
    )
