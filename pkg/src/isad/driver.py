"""The solver loop: sampling, the three updates, penalty tuning, tracing.

Each round runs, in this exact order: sample the scheduled batch and refresh
the operator mean, prox step on y, minimization step on x, dual step on z,
penalty oracle last. One trace row is emitted per round; identical
(config, seed) pairs produce bitwise-identical traces. A run is strictly
sequential; independent runs share nothing mutable.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BoundGuardError, ConfigurationError
from .lagrangian import (
    SolverState,
    eval_lagrangian,
    eval_surrogate_g,
    kkt_residual,
    surrogate_grad,
    x_update_closed_form,
    x_update_general,
    y_update,
    z_update,
)
from .objective import ObjectiveModel
from .penalty import STALL_TOL, OracleState, apo_b_step, general_apo
from .sampling import (
    MatrixDistribution,
    SamplingRegime,
    advance_round,
    min_eig_gram,
    new_estimator,
)

APO_KINDS = ("bounded", "general")
X_SOLVERS = ("auto", "closed", "iterative")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the problem instance itself.

    Stopping is disabled unless both tolerances are set, in which case the
    loop ends once dx <= tol_dx and the feasibility gap <= tol_kkt hold for
    ``stop_window`` consecutive rounds. ``guard`` aborts visibly when iterate
    norms blow up instead of silently diverging.
    """

    dim: int
    x0: np.ndarray
    z0: np.ndarray
    beta0: float = 1.0
    regime: SamplingRegime = field(default_factory=lambda: SamplingRegime(0.5))
    apo_kind: str = "bounded"
    apo_eps: float = 0.1
    max_rounds: int = 2000
    tol_dx: Optional[float] = None
    tol_kkt: Optional[float] = None
    stop_window: int = 5
    seed: int = 0
    out: Optional[str] = None
    inner_tol: float = 1e-8
    max_inner: int = 10_000
    x_solver: str = "auto"
    guard: float = 1e8

    def __post_init__(self):
        if self.beta0 <= 0:
            raise ConfigurationError("beta0 must be positive")
        if self.max_rounds < 1:
            raise ConfigurationError("max_rounds must be at least 1")
        if self.apo_kind not in APO_KINDS:
            raise ConfigurationError(f"apo_kind must be one of {APO_KINDS}")
        if self.x_solver not in X_SOLVERS:
            raise ConfigurationError(f"x_solver must be one of {X_SOLVERS}")
        x0 = np.asarray(self.x0, dtype=float)
        z0 = np.asarray(self.z0, dtype=float)
        if x0.size != self.dim or z0.size != self.dim:
            raise ConfigurationError("x0 and z0 must have length dim")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "z0", z0)


@dataclass(frozen=True)
class TraceRow:
    """One solver round. See the README for the column glossary."""

    t: int
    beta: float
    dx: float
    dy: float
    dz: float
    feas: float
    lagrangian: float
    sigma_tilde: float
    zeta: float
    xi: float
    zeta_shadow: float
    xi_shadow: float
    samples_total: int
    r_prox: float
    r_grad: float
    r_feas: float
    inner_iters: int
    apo_updated: bool
    x_resid: float
    y_resid: float
    z_resid: float
    grad_ident_resid: float
    g_dec: float
    rho: float


TRACE_FIELDS = [f.name for f in dataclasses.fields(TraceRow)]


def format_trace_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_trace(rows, path) -> None:
    """Comma-separated trace: header row, one line per round, 17-digit floats."""
    lines = [",".join(TRACE_FIELDS)]
    for row in rows:
        lines.append(
            ",".join(format_trace_value(getattr(row, name)) for name in TRACE_FIELDS)
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def stopping_check(rows, tol_dx, tol_kkt, window: int = 5) -> bool:
    """True when the last ``window`` rounds all meet both tolerances."""
    if tol_dx is None or tol_kkt is None:
        return False
    if len(rows) < window:
        return False
    return all(r.dx <= tol_dx and r.feas <= tol_kkt for r in rows[-window:])


def _pick_x_solver(config: RunConfig, model: ObjectiveModel) -> str:
    if config.x_solver != "auto":
        return config.x_solver
    if config.apo_kind == "bounded" and model.smooth.hessian_bound is not None:
        return "closed"
    return "iterative"


def run(config: RunConfig, dist: MatrixDistribution, model: ObjectiveModel):
    """Execute the solver loop; returns the final state and the trace.

    Raises :class:`ConfigurationError` for mismatched setups and
    :class:`BoundGuardError` when iterate norms exceed the guard.
    """
    if dist.n != config.dim:
        raise ConfigurationError("distribution dimension does not match the run")
    if model.smooth.dim != config.dim:
        raise ConfigurationError("model dimension does not match the run")
    if config.apo_kind == "bounded" and model.smooth.hessian_bound is None:
        raise ConfigurationError("the bounded penalty rule needs a Hessian bound")
    if model.domain_guard is not None:
        model.domain_guard(config.x0)

    solver = _pick_x_solver(config, model)
    gamma = model.smooth.hessian_bound
    true_mean = dist.base_mean
    phi = model.phi

    est = new_estimator(config.dim, seed=config.seed)
    oracle = OracleState(beta=config.beta0)
    x = config.x0.copy()
    z = config.z0.copy()
    y_prev: Optional[np.ndarray] = None
    prev_mean = est.mean_estimate
    rows: list[TraceRow] = []

    for t in range(config.max_rounds):
        est = advance_round(est, dist, config.regime)
        M_curr = est.mean_estimate
        beta = oracle.beta
        state = SolverState(
            x=x, y=y_prev if y_prev is not None else np.zeros(config.dim),
            z=z, beta=beta, t=t,
        )

        y_next = y_update(state, M_curr, model)
        if y_prev is None:
            # the first prox step doubles as the y initialization
            y_prev = y_next

        if solver == "closed":
            xres = x_update_closed_form(state, prev_mean, M_curr, y_next, model)
        else:
            xres = x_update_general(
                state,
                prev_mean,
                M_curr,
                y_next,
                model,
                phi,
                inner_tol=config.inner_tol,
                max_inner=config.max_inner,
            )
        x_next = xres.x
        z_next = z_update(state, M_curr, y_next, x_next)

        # per-round diagnostics
        g_next_val = eval_surrogate_g(x_next, state, prev_mean, M_curr, y_next, model, phi)
        g_prev_val = eval_surrogate_g(x, state, prev_mean, M_curr, y_next, model, phi)
        g_dec = g_next_val - g_prev_val
        dx = float(np.linalg.norm(x_next - x))
        rho = math.nan
        if dx > STALL_TOL * (1.0 + float(np.linalg.norm(x))):
            rho = -2.0 * g_dec / (dx * dx)

        grad_h_next = model.smooth.grad(x_next)
        grad_phi_next = phi.grad(x_next)
        grad_phi_prev = phi.grad(x)
        grad_sum_next = grad_h_next + grad_phi_next
        grad_sum_prev = model.smooth.grad(x) + grad_phi_prev

        feas_vec = M_curr @ x_next - y_next
        feas = float(np.linalg.norm(feas_vec))
        dual_step = (z - z_next) / beta
        z_resid = float(
            np.linalg.norm(feas_vec - dual_step)
            / (1.0 + np.linalg.norm(feas_vec) + np.linalg.norm(dual_step))
        )
        y_recomputed = model.prox.prox(1.0 / beta, M_curr @ x - z / beta)
        y_resid = float(np.linalg.norm(y_next - y_recomputed))
        grad_ident_resid = float(
            np.linalg.norm(
                grad_h_next - M_curr.T @ z_next + grad_phi_next - grad_phi_prev
            )
        )
        sigma_tilde = min_eig_gram(M_curr)
        kkt = kkt_residual(
            SolverState(x=x_next, y=y_next, z=z_next, beta=beta, t=t + 1),
            true_mean,
            model,
        )
        lag_val = eval_lagrangian(x_next, y_next, z_next, beta, M_curr, model)

        if config.apo_kind == "bounded":
            oracle = apo_b_step(
                oracle,
                x_next,
                x,
                grad_sum_next,
                grad_sum_prev,
                grad_phi_next,
                grad_phi_prev,
                M_curr,
                gamma,
                config.apo_eps,
                round_index=t + 1,
            )
        else:
            oracle = general_apo(
                x_next,
                x,
                oracle,
                config.apo_eps,
                M_curr,
                g_next_val,
                g_prev_val,
                grad_sum_next,
                grad_sum_prev,
                grad_phi_next,
                grad_phi_prev,
                round_index=t + 1,
            )
        apo_updated = oracle.last_update_round == t + 1

        rows.append(
            TraceRow(
                t=t + 1,
                beta=beta,
                dx=dx,
                dy=float(np.linalg.norm(y_next - y_prev)),
                dz=float(np.linalg.norm(z_next - z)),
                feas=feas,
                lagrangian=lag_val,
                sigma_tilde=sigma_tilde,
                zeta=oracle.zeta,
                xi=oracle.xi,
                zeta_shadow=oracle.zeta_shadow,
                xi_shadow=oracle.xi_shadow,
                samples_total=est.total_samples,
                r_prox=kkt.r_prox,
                r_grad=kkt.r_grad,
                r_feas=kkt.r_feas,
                inner_iters=xres.inner_iters,
                apo_updated=apo_updated,
                x_resid=xres.grad_norm,
                y_resid=y_resid,
                z_resid=z_resid,
                grad_ident_resid=grad_ident_resid,
                g_dec=g_dec,
                rho=rho,
            )
        )

        x, y_prev, z = x_next, y_next, z_next
        prev_mean = M_curr

        total_norm = (
            np.linalg.norm(x) + np.linalg.norm(y_prev) + np.linalg.norm(z)
        )
        if total_norm > config.guard:
            raise BoundGuardError(
                f"iterate norms reached {total_norm:.3e} at round {t + 1}, "
                f"beyond the guard {config.guard:.3e}"
            )
        if stopping_check(rows, config.tol_dx, config.tol_kkt, config.stop_window):
            break

    final = SolverState(x=x, y=y_prev, z=z, beta=oracle.beta, t=rows[-1].t)
    if config.out:
        write_trace(rows, config.out)
    return final, rows
