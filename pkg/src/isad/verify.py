"""Monte-Carlo verification of the sampling guarantees.

Three experiments: decay of the tail fraction of estimator errors under the
regime-matched thresholds, the first round after which the smallest Gram
eigenvalue of the estimate stays inside a multiplicative band around the
truth, and the expectation identity linking the sampled and exact penalized
Lagrangians. Trials own independent streams keyed by (seed, trial), so
reports are deterministic given (config, seed) and insensitive to execution
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .sampling import (
    MatrixDistribution,
    SamplingRegime,
    advance_round,
    estimation_error,
    min_eig_gram,
    new_estimator,
    substream,
)


@dataclass(frozen=True)
class ConcentrationReport:
    """Tail fractions q_t of estimator errors over independent trials.

    ``threshold_scale`` is the empirically calibrated constant c in the
    per-round threshold c * n^2 / t^(0.5 + 0.25 eps); ``cumulative_sq`` holds
    each trial's running sum of squared error norms at t_max.
    """

    rounds: np.ndarray
    q: np.ndarray
    thresholds: np.ndarray
    threshold_scale: float
    epsilon: float
    subgaussian: bool
    trials: int
    cumulative_sq: np.ndarray
    errors: np.ndarray  # (trials, t_max) operator norms of the error

    def first_round_below(self, level: float) -> Optional[int]:
        hits = np.nonzero(self.q < level)[0]
        return int(self.rounds[hits[0]]) if hits.size else None


def _error_curves(dist, regime, t_max, trials, seed):
    errors = np.empty((trials, t_max))
    for trial in range(trials):
        est = new_estimator(dist.n, seed=seed, stream_key=(trial,))
        for t in range(1, t_max + 1):
            est = advance_round(est, dist, regime)
            errors[trial, t - 1] = estimation_error(est, dist.base_mean).op_norm
    return errors


def concentration_experiment(
    dist: MatrixDistribution,
    regime: SamplingRegime,
    t_max: int,
    trials: int,
    seed: int = 0,
) -> ConcentrationReport:
    """Fraction of trials whose error exceeds the decaying threshold, per round.

    The constant is calibrated at the first round (the median error over
    trials divided by n^2), which places q_1 near one half; a zero-variance
    source calibrates to zero and reports q identically zero.
    """
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    errors = _error_curves(dist, regime, t_max, trials, seed)
    n_sq = float(dist.n) ** 2
    scale = float(np.median(errors[:, 0])) / n_sq
    rounds = np.arange(1, t_max + 1)
    thresholds = scale * n_sq / rounds.astype(float) ** (0.5 + 0.25 * regime.epsilon)
    q = (errors > thresholds[None, :]).mean(axis=0)
    return ConcentrationReport(
        rounds=rounds,
        q=q,
        thresholds=thresholds,
        threshold_scale=scale,
        epsilon=regime.epsilon,
        subgaussian=regime.subgaussian,
        trials=trials,
        cumulative_sq=(errors**2).sum(axis=1),
        errors=errors,
    )


def write_concentration_csv(report: ConcentrationReport, path) -> None:
    lines = ["t,threshold,q"]
    for t, thr, q_t in zip(report.rounds, report.thresholds, report.q):
        lines.append(f"{t},{thr:.17g},{q_t:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SandwichReport:
    """Per-trial first stable round of the Gram-eigenvalue band.

    ``stable_round[i]`` is the first round from which the estimate's smallest
    Gram eigenvalue stays within (1 +- eps_prime) of the true one through
    t_max, or -1 when the trial never stabilizes.
    """

    stable_round: np.ndarray
    fraction_stable: float
    sigma: float
    eps_prime: float
    t_max: int


def eig_sandwich_experiment(
    dist: MatrixDistribution,
    regime: SamplingRegime,
    eps_prime: float,
    t_max: int,
    trials: int,
    seed: int = 0,
) -> SandwichReport:
    if not 0.0 < eps_prime < 1.0:
        raise ConfigurationError("eps_prime must be in (0, 1)")
    sigma = min_eig_gram(dist.base_mean)
    lo, hi = (1.0 - eps_prime) * sigma, (1.0 + eps_prime) * sigma
    stable = np.full(trials, -1, dtype=int)
    for trial in range(trials):
        est = new_estimator(dist.n, seed=seed, stream_key=(trial,))
        inside = np.empty(t_max, dtype=bool)
        for t in range(1, t_max + 1):
            est = advance_round(est, dist, regime)
            val = min_eig_gram(est.mean_estimate)
            inside[t - 1] = lo <= val <= hi
        # first round from which the band holds through the horizon
        holds_from = t_max + 1
        for t in range(t_max, 0, -1):
            if inside[t - 1]:
                holds_from = t
            else:
                break
        if holds_from <= t_max:
            stable[trial] = holds_from
    fraction = float((stable > 0).mean())
    return SandwichReport(
        stable_round=stable,
        fraction_stable=fraction,
        sigma=sigma,
        eps_prime=eps_prime,
        t_max=t_max,
    )


def write_sandwich_csv(report: SandwichReport, path) -> None:
    lines = ["trial,stable_round"]
    for i, k in enumerate(report.stable_round):
        lines.append(f"{i},{int(k)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class BiasReport:
    """Monte-Carlo check of the sampled-vs-exact Lagrangian gap identity.

    The expectation of the sampled penalized Lagrangian exceeds the exact one
    by beta/2 times the mean squared error image of x; ``gap`` is the paired
    Monte-Carlo difference between the two estimates and should sit within a
    few standard errors of zero.
    """

    lhs: float
    rhs: float
    gap: float
    std_error: float
    z_score: float
    trials: int


def bias_identity_check(
    x,
    y,
    z,
    beta: float,
    dist: MatrixDistribution,
    samples_per_estimate: int,
    trials: int,
    seed: int = 0,
) -> BiasReport:
    """Paired Monte-Carlo estimate of both sides of the gap identity.

    The smooth and prox terms cancel from the gap, so only the coupling and
    penalty terms are evaluated; the prox value at y must be finite for the
    identity to make sense in the first place.
    """
    if samples_per_estimate < 1:
        raise ConfigurationError("need at least one sample per estimate")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    mean = dist.base_mean
    exact_res = mean @ x - y

    def coupling(A):
        r = A @ x - y
        return float(-z @ r + 0.5 * beta * (r @ r))

    exact_val = coupling(mean)
    diffs = np.empty(trials)
    rhs_vals = np.empty(trials)
    for trial in range(trials):
        rng = substream(seed, trial)
        batch = dist.sample(rng, samples_per_estimate)
        m_bar = batch.mean(axis=0)
        delta_x = (m_bar - mean) @ x
        lhs_t = coupling(m_bar) - exact_val
        rhs_t = 0.5 * beta * float(delta_x @ delta_x)
        diffs[trial] = lhs_t - rhs_t
        rhs_vals[trial] = rhs_t
    gap = float(diffs.mean())
    std_error = float(diffs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    z_score = abs(gap) / std_error if std_error > 0 else 0.0
    return BiasReport(
        lhs=float(gap + rhs_vals.mean()),
        rhs=float(rhs_vals.mean()),
        gap=gap,
        std_error=std_error,
        z_score=z_score,
        trials=trials,
    )


def write_bias_csv(report: BiasReport, path) -> None:
    lines = [
        "lhs,rhs,gap,std_error,z_score,trials",
        f"{report.lhs:.17g},{report.rhs:.17g},{report.gap:.17g},"
        f"{report.std_error:.17g},{report.z_score:.17g},{report.trials}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
