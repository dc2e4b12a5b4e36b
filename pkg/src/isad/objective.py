"""Smooth terms, prox-tractable terms, and Bregman generators.

The solver consumes an :class:`ObjectiveModel` bundling a smooth part with
value/gradient (and optionally a two-sided Hessian bound), a prox-tractable
part, and a convex generator for the Bregman damping of the x-step. The
gallery below covers quadratics, binary logistic loss, log-squared-norm and
Tikhonov energies on the smooth side, and zero, squared offset,
negative-log-squared-norm, soft-threshold-with-pinned-coordinates, and
coordinate-dropping extensions on the prox side.

All instances are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, ProxDegeneracyWarning


@dataclass(frozen=True)
class Smooth:
    """Twice continuously differentiable term with optional curvature bound.

    ``hessian_bound`` is any gamma with -gamma I <= hess <= gamma I; it does
    not have to be tight.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hessian_bound: Optional[float] = None
    name: str = "smooth"


@dataclass(frozen=True)
class Prox:
    """Proper lower semi-continuous term with a cheap proximal map.

    ``prox(tau, u)`` returns one minimizer of tau*value(y) + 0.5*||y - u||^2;
    tie-breaks are deterministic.
    """

    dim: Optional[int]
    value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]
    name: str = "prox"


@dataclass(frozen=True)
class Bregman:
    """Convex C^2 generator for the Bregman distance in the x-step."""

    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    convex: bool = True
    name: str = "bregman"


@dataclass(frozen=True)
class ObjectiveModel:
    """Bundle of the three objective pieces plus an optional domain guard.

    ``domain_guard`` (if set) is called with the initial point and raises
    when the point is outside the smooth term's domain.
    """

    smooth: Smooth
    prox: Prox
    phi: Bregman
    name: str = "model"
    domain_guard: Optional[Callable[[np.ndarray], None]] = None


def bregman(phi: Bregman, x1: np.ndarray, x2: np.ndarray) -> float:
    """Bregman distance phi(x1) - phi(x2) - <grad phi(x2), x1 - x2>."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.size != phi.dim:
        raise ConfigurationError("Bregman arguments must match the generator dim")
    return float(phi.value(x1) - phi.value(x2) - phi.grad(x2) @ (x1 - x2))


def bounded_hessian_generator(smooth: Smooth) -> Bregman:
    """Canonical generator gamma/2 ||x||^2 - h(x) for a bounded-Hessian h.

    Convex because the Hessian of the result is gamma I - hess h >= 0.
    """
    if smooth.hessian_bound is None:
        raise ConfigurationError(
            f"smooth term {smooth.name!r} has no Hessian bound; the canonical "
            "generator needs one"
        )
    gamma = float(smooth.hessian_bound)
    return Bregman(
        dim=smooth.dim,
        value=lambda x: 0.5 * gamma * float(x @ x) - smooth.value(x),
        grad=lambda x: gamma * np.asarray(x, dtype=float) - smooth.grad(x),
        convex=True,
        name=f"curvature-matched({smooth.name})",
    )


def half_sqnorm_generator(dim: int, weight: float = 1.0) -> Bregman:
    """Plain quadratic generator weight/2 ||x||^2."""
    if weight <= 0:
        raise ConfigurationError("generator weight must be positive")
    return Bregman(
        dim=dim,
        value=lambda x: 0.5 * weight * float(np.asarray(x) @ np.asarray(x)),
        grad=lambda x: weight * np.asarray(x, dtype=float),
        convex=True,
        name="half-sqnorm",
    )


# ---------------------------------------------------------------------------
# smooth gallery
# ---------------------------------------------------------------------------


def zero_smooth(dim: int, hessian_bound: float = 0.0) -> Smooth:
    """h identically zero; the declared bound may be any nonnegative value."""
    return Smooth(
        dim=dim,
        value=lambda x: 0.0,
        grad=lambda x: np.zeros(dim),
        hessian_bound=hessian_bound,
        name="zero",
    )


def quadratic_smooth(Q: np.ndarray, b=None, c: float = 0.0) -> Smooth:
    """h(x) = x^T Q x + b^T x + c with bound 2||Q||."""
    Q = np.asarray(Q, dtype=float)
    dim = Q.shape[0]
    b = np.zeros(dim) if b is None else np.asarray(b, dtype=float)
    sym = Q + Q.T
    bound = 2.0 * float(np.linalg.norm(Q, 2))
    return Smooth(
        dim=dim,
        value=lambda x: float(x @ Q @ x + b @ x + c),
        grad=lambda x: sym @ x + b,
        hessian_bound=bound,
        name="quadratic",
    )


def tikhonov_smooth(Gamma: np.ndarray) -> Smooth:
    """h(f) = ||Gamma f||^2."""
    Gamma = np.asarray(Gamma, dtype=float)
    s = quadratic_smooth(Gamma.T @ Gamma)
    return Smooth(s.dim, s.value, s.grad, s.hessian_bound, name="tikhonov-energy")


def logistic_loss(features: np.ndarray, labels: np.ndarray) -> Smooth:
    """Binary logistic negative log-likelihood over (feature, 0/1 label) rows.

    The curvature bound is 0.25 times the top eigenvalue of the feature
    second-moment matrix, which dominates the Hessian everywhere.
    """
    X = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(labels, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ConfigurationError("features and labels must have the same length")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    moment = X.T @ X
    bound = 0.25 * float(np.linalg.eigvalsh(moment)[-1])

    def value(theta):
        z = X @ theta
        return float(np.sum(np.logaddexp(0.0, z) - y * z))

    def grad(theta):
        z = X @ theta
        sigma = 1.0 / (1.0 + np.exp(-z))
        return X.T @ (sigma - y)

    return Smooth(X.shape[1], value, grad, bound, name="logistic")


def log_sqnorm_smooth(dim: int) -> Smooth:
    """h(x) = ln ||x||^2. No global curvature bound; undefined at the origin."""

    def value(x):
        sq = float(np.asarray(x) @ np.asarray(x))
        if sq == 0.0:
            return -math.inf
        return math.log(sq)

    def grad(x):
        x = np.asarray(x, dtype=float)
        sq = float(x @ x)
        if sq == 0.0:
            raise ConfigurationError("gradient of ln||x||^2 is undefined at 0")
        return 2.0 * x / sq

    return Smooth(dim, value, grad, hessian_bound=None, name="log-sqnorm")


# ---------------------------------------------------------------------------
# prox gallery
# ---------------------------------------------------------------------------


def prox_zero(dim: Optional[int] = None) -> Prox:
    """P identically zero; the prox is the identity."""
    return Prox(
        dim=dim,
        value=lambda u: 0.0,
        prox=lambda tau, u: np.array(u, dtype=float),
        name="zero",
    )


def prox_squared_offset(g: np.ndarray) -> Prox:
    """P(u) = ||u - g||^2 with prox (u + 2 tau g) / (1 + 2 tau)."""
    g = np.asarray(g, dtype=float)

    def value(u):
        d = np.asarray(u, dtype=float) - g
        return float(d @ d)

    def prox(tau, u):
        return (np.asarray(u, dtype=float) + 2.0 * tau * g) / (1.0 + 2.0 * tau)

    return Prox(g.size, value, prox, name="squared-offset")


def prox_neg_log_sqnorm(dim: int) -> Prox:
    """P(y) = -ln ||y||^2; the prox rescales u radially.

    The radius solves s^2 - ||u|| s - 2 tau = 0. At u = 0 the direction is
    undetermined; the first basis vector is used and a degeneracy warning is
    emitted.
    """

    def value(y):
        sq = float(np.asarray(y) @ np.asarray(y))
        if sq == 0.0:
            return math.inf
        return -math.log(sq)

    def prox(tau, u):
        u = np.asarray(u, dtype=float)
        r = float(np.linalg.norm(u))
        if r == 0.0:
            warnings.warn(
                "prox of -ln||y||^2 at the origin: direction undetermined, "
                "picking the first basis vector",
                ProxDegeneracyWarning,
            )
            direction = np.zeros(u.size)
            direction[0] = 1.0
        else:
            direction = u / r
        s = 0.5 * (r + math.sqrt(r * r + 8.0 * tau))
        return s * direction

    return Prox(dim, value, prox, name="neg-log-sqnorm")


def _soft_threshold(u: np.ndarray, level: float) -> np.ndarray:
    return np.sign(u) * np.maximum(np.abs(u) - level, 0.0)


def prox_irl(N: int) -> Prox:
    """Scaled l1 on the first N coordinates, last N pinned to -1.

    P(u) = (1/N) sum |u_i| over i <= N, plus the indicator of
    u_{N+1} = ... = u_{2N} = -1. The prox soft-thresholds the first block at
    tau/N and writes -1 into the second block.
    """
    if N < 1:
        raise ConfigurationError("N must be at least 1")

    def value(u):
        u = np.asarray(u, dtype=float)
        if u.size != 2 * N:
            raise ConfigurationError("argument must have dimension 2N")
        if not np.all(u[N:] == -1.0):
            return math.inf
        return float(np.abs(u[:N]).sum()) / N

    def prox(tau, u):
        u = np.asarray(u, dtype=float)
        out = np.empty(2 * N)
        out[:N] = _soft_threshold(u[:N], tau / N)
        out[N:] = -1.0
        return out

    return Prox(2 * N, value, prox, name="irl")


def prox_coordinate_drop(n: int, inner: Prox) -> Prox:
    """Extension that applies ``inner`` to the first m coordinates only.

    The remaining n - m coordinates do not enter the value and pass through
    the prox unchanged.
    """
    if inner.dim is None:
        raise ConfigurationError("inner prox must have a fixed dimension")
    m = inner.dim
    if n < m:
        raise ConfigurationError("extension dimension must be at least inner dim")

    def value(u):
        u = np.asarray(u, dtype=float)
        if u.size != n:
            raise ConfigurationError("argument dimension mismatch")
        return inner.value(u[:m])

    def prox(tau, u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([inner.prox(tau, u[:m]), u[m:]])

    return Prox(n, value, prox, name=f"coordinate-drop({inner.name})")
