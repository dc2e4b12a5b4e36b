"""Iterative sampling alternating directions (ISAD) solver.

Minimizes h(x) + P(E[M] x) where M is a random linear operator known only
through i.i.d. samples: the loop interleaves a growing-batch mean estimate
of the operator with alternating prox/dual updates of a penalized Lagrangian
and an adaptive penalty oracle.
"""

from .driver import RunConfig, TraceRow, run, stopping_check, write_trace
from .errors import BoundGuardError, ConfigurationError, ProxDegeneracyWarning
from .lagrangian import (
    KktResidual,
    SolverState,
    eval_lagrangian,
    eval_surrogate_g,
    kkt_residual,
    x_update_closed_form,
    x_update_general,
    y_update,
    z_update,
)
from .objective import (
    Bregman,
    ObjectiveModel,
    Prox,
    Smooth,
    bounded_hessian_generator,
    bregman,
    half_sqnorm_generator,
    log_sqnorm_smooth,
    logistic_loss,
    prox_coordinate_drop,
    prox_irl,
    prox_neg_log_sqnorm,
    prox_squared_offset,
    prox_zero,
    quadratic_smooth,
    tikhonov_smooth,
    zero_smooth,
)
from .penalty import (
    ELipEstimate,
    OracleState,
    apo_b,
    apo_b_step,
    empirical_lipschitz,
    general_apo,
)
from .problems import (
    bundled_default,
    make_irl_toy,
    make_max_sv,
    make_quadratic_baseline,
    make_tikhonov,
)
from .sampling import (
    ErrorReport,
    MatrixDistribution,
    MatrixEstimator,
    SamplingRegime,
    advance_round,
    estimation_error,
    extend_to_square,
    draw_sphere_vectors,
    min_eig_gram,
    min_eig_gram_two_stage,
    new_estimator,
    op_norm_gram,
    substream,
    theta,
)
from .verify import (
    BiasReport,
    ConcentrationReport,
    SandwichReport,
    bias_identity_check,
    concentration_experiment,
    eig_sandwich_experiment,
)

__version__ = "0.1.0"
