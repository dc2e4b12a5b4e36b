"""Built-in problem instances with analytic or brute-force solution oracles.

Four families: Tikhonov-regularized recovery under a sampled blur, the
maximum singular value of a sampled matrix, a toy inverse-decision problem
with an absolute-error loss on half the coordinates and the other half
pinned, and a deterministic quadratic baseline. Constructors are pure and
the returned instances immutable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .driver import RunConfig
from .errors import ConfigurationError
from .objective import (
    ObjectiveModel,
    bounded_hessian_generator,
    half_sqnorm_generator,
    log_sqnorm_smooth,
    prox_irl,
    prox_neg_log_sqnorm,
    prox_squared_offset,
    quadratic_smooth,
    tikhonov_smooth,
    zero_smooth,
)
from .sampling import MatrixDistribution, SamplingRegime, min_eig_gram

FULL_RANK_FLOOR = 1e-10
# The closed-form x-step and the bounded penalty rule need a strictly
# positive curvature scale even when the smooth part is flat.
CURVATURE_FLOOR = 1.0

PROBLEM_KINDS = ("tikhonov", "max_sv", "irl", "quadratic")


def _require_full_rank(mean: np.ndarray, what: str) -> None:
    if min_eig_gram(mean) <= FULL_RANK_FLOOR:
        raise ConfigurationError(f"{what}: the operator mean is rank deficient")


def _floored_bound(smooth):
    if smooth.hessian_bound is None or smooth.hessian_bound >= CURVATURE_FLOOR:
        return smooth
    return dataclasses.replace(smooth, hessian_bound=CURVATURE_FLOOR)


def make_tikhonov(
    n: int,
    blur_mean: np.ndarray,
    noise_scale: float,
    reg_matrix: np.ndarray,
    target: np.ndarray,
    seed: int = 0,
):
    """Recovery of f from a blurred target: ||H f - g||^2 + ||Gamma f||^2.

    Returns (model, distribution, analytic solution); the solution solves the
    normal equations (H^T H + Gamma^T Gamma) f = H^T g.
    """
    H = np.asarray(blur_mean, dtype=float)
    Gamma = np.asarray(reg_matrix, dtype=float)
    g = np.asarray(target, dtype=float)
    if H.shape != (n, n) or Gamma.shape != (n, n) or g.size != n:
        raise ConfigurationError("tikhonov pieces must all have dimension n")
    normal = H.T @ H + Gamma.T @ Gamma
    if np.linalg.eigvalsh(normal)[0] <= FULL_RANK_FLOOR:
        raise ConfigurationError("H^T H + Gamma^T Gamma is singular")
    f_star = scipy.linalg.cho_solve(scipy.linalg.cho_factor(normal), H.T @ g)
    _require_full_rank(H, "tikhonov")
    smooth = _floored_bound(tikhonov_smooth(Gamma))
    model = ObjectiveModel(
        smooth=smooth,
        prox=prox_squared_offset(g),
        phi=bounded_hessian_generator(smooth),
        name="tikhonov",
    )
    dist = MatrixDistribution(
        "entrywise-gaussian", H, noise_scale=noise_scale, subgaussian=True
    )
    return model, dist, f_star


def make_max_sv(
    n: int, dist: MatrixDistribution, seed: int = 0, phi_weight: float = 24.0
):
    """Largest singular value of the operator mean via ln||x||^2 - ln||Ax||^2.

    Returns (model, (sigma_max, top right-singular direction)); the oracle is
    a dense singular value decomposition of the distribution mean.

    The damping generator needs enough weight to keep a critical point of the
    x-surrogate near the warm start: ln||x||^2 is unbounded below at the
    origin, and a weakly damped descent path dives into that singularity.
    """
    if dist.n != n:
        raise ConfigurationError("distribution dimension must be n")
    mean = dist.base_mean
    if np.allclose(mean, 0.0):
        raise ConfigurationError("the operator mean must be nonzero")
    _require_full_rank(mean, "max_sv")
    _, s, vt = np.linalg.svd(mean)
    smooth = log_sqnorm_smooth(n)

    def guard(x0):
        if np.linalg.norm(x0) == 0.0:
            raise ConfigurationError("ln||x||^2 rejects the zero initial point")

    model = ObjectiveModel(
        smooth=smooth,
        prox=prox_neg_log_sqnorm(n),
        phi=half_sqnorm_generator(n, weight=phi_weight),
        name="max_sv",
        domain_guard=guard,
    )
    return model, (float(s[0]), vt[0])


def make_irl_toy(
    N: int,
    G_values: np.ndarray,
    f_inv_means: np.ndarray,
    noise_scale: float = 0.0,
    seed: int = 0,
):
    """Toy inverse-decision instance on 2N coordinates.

    The operator couples each decision parameter with a sampled inverse-map
    estimate: the mean is [[diag(G), diag(f_inv)], [0, I]], only the sampled
    block fluctuates, and the prox pins the last N coordinates to -1. Any
    zero entry in G makes the mean rank deficient and is rejected.
    """
    G = np.asarray(G_values, dtype=float).ravel()
    f_inv = np.asarray(f_inv_means, dtype=float).ravel()
    if G.size != N or f_inv.size != N:
        raise ConfigurationError("G_values and f_inv_means must have length N")
    if np.any(G == 0.0):
        raise ConfigurationError("zero entries in G make the mean rank deficient")
    base = np.zeros((2 * N, 2 * N))
    base[:N, :N] = np.diag(G)
    base[:N, N:] = np.diag(f_inv)
    base[N:, N:] = np.eye(N)
    mask = np.zeros_like(base)
    mask[:N, N:] = np.eye(N)
    _require_full_rank(base, "irl")
    smooth = zero_smooth(2 * N, hessian_bound=CURVATURE_FLOOR)
    model = ObjectiveModel(
        smooth=smooth,
        prox=prox_irl(N),
        phi=bounded_hessian_generator(smooth),
        name="irl",
    )
    dist = MatrixDistribution(
        "entrywise-bounded-uniform",
        base,
        noise_scale=noise_scale,
        subgaussian=True,
        noise_mask=mask,
    )
    return model, dist


def make_quadratic_baseline(n: int, seed: int = 0):
    """Strongly convex quadratic plus squared offset under a fixed operator.

    Returns (model, distribution, solution); the solution solves the
    stationarity system (Q + 2 M^T M) x = 2 M^T g - b.
    """
    rng = np.random.default_rng(seed)
    root = rng.standard_normal((n, n))
    Q = root.T @ root / n + 0.5 * np.eye(n)
    b = rng.standard_normal(n)
    g = rng.standard_normal(n)
    u, _, vt = np.linalg.svd(rng.standard_normal((n, n)))
    M = u @ np.diag(np.linspace(1.0, 1.8, n)) @ vt
    _require_full_rank(M, "quadratic")
    smooth = quadratic_smooth(0.5 * Q, b)
    model = ObjectiveModel(
        smooth=smooth,
        prox=prox_squared_offset(g),
        phi=bounded_hessian_generator(smooth),
        name="quadratic",
    )
    dist = MatrixDistribution("fixed-matrix-plus-noise", M, noise_scale=0.0)
    x_star = np.linalg.solve(Q + 2.0 * M.T @ M, 2.0 * M.T @ g - b)
    return model, dist, x_star


@dataclass(frozen=True)
class BundledProblem:
    """A ready-to-run instance: model, distribution, run config, oracle info."""

    name: str
    model: ObjectiveModel
    dist: MatrixDistribution
    config: RunConfig
    info: dict


def bundled_default(name: str, seed: int = 0) -> BundledProblem:
    """Default desk-scale setup for each problem kind.

    These are the instances the acceptance suite drives for 2000 rounds with
    beta0 = 1 and oracle eps = 0.1.
    """
    if name == "quadratic":
        n = 6
        model, dist, x_star = make_quadratic_baseline(n, seed=7)
        config = RunConfig(
            dim=n,
            x0=np.zeros(n),
            z0=np.zeros(n),
            regime=SamplingRegime(0.5, subgaussian=True),
            apo_kind="bounded",
            seed=seed,
        )
        info = {"solution": x_star, "sigma": min_eig_gram(dist.base_mean)}
    elif name == "tikhonov":
        n = 8
        rng = np.random.default_rng(3)
        u, _, vt = np.linalg.svd(rng.standard_normal((n, n)))
        H = u @ np.diag(np.linspace(0.7, 1.5, n)) @ vt
        Gamma = 0.5 * np.eye(n)
        g = rng.standard_normal(n)
        model, dist, f_star = make_tikhonov(n, H, 0.02, Gamma, g, seed=3)
        config = RunConfig(
            dim=n,
            x0=np.zeros(n),
            z0=np.zeros(n),
            regime=SamplingRegime(0.5, subgaussian=True),
            apo_kind="bounded",
            seed=seed,
        )
        info = {"solution": f_star, "sigma": min_eig_gram(dist.base_mean)}
    elif name == "irl":
        N = 3
        rng = np.random.default_rng(11)
        G = rng.uniform(0.8, 2.0, N)
        f_inv = rng.uniform(-2.0, 2.0, N)
        model, dist = make_irl_toy(N, G, f_inv, noise_scale=0.25, seed=11)
        config = RunConfig(
            dim=2 * N,
            x0=np.zeros(2 * N),
            z0=np.zeros(2 * N),
            regime=SamplingRegime(0.5, subgaussian=True),
            apo_kind="bounded",
            seed=seed,
        )
        info = {"G": G, "f_inv": f_inv, "sigma": min_eig_gram(dist.base_mean)}
    elif name == "max_sv":
        n = 4
        rng = np.random.default_rng(5)
        u, _, vt = np.linalg.svd(rng.standard_normal((n, n)))
        base = u @ np.diag([2.0, 1.3, 0.9, 0.6]) @ vt
        dist = MatrixDistribution(
            "entrywise-bounded-uniform", base, noise_scale=0.1, subgaussian=True
        )
        model, oracle = make_max_sv(n, dist, seed=5)
        x0 = rng.standard_normal(n)
        x0 /= np.linalg.norm(x0)
        config = RunConfig(
            dim=n,
            x0=x0,
            z0=np.zeros(n),
            regime=SamplingRegime(0.5, subgaussian=True),
            apo_kind="general",
            # backtracking on O(1) surrogate values cannot certify gradients
            # much below the float64 decrease floor; see README
            inner_tol=1e-5,
            seed=seed,
        )
        info = {
            "sigma_max": oracle[0],
            "direction": oracle[1],
            "sigma": min_eig_gram(dist.base_mean),
        }
    else:
        raise ConfigurationError(f"unknown problem kind {name!r}")
    return BundledProblem(name=name, model=model, dist=dist, config=config, info=info)
