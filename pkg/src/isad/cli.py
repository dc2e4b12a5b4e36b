"""Command line entry points.

    isad run --config run.cfg [--seed N] [--out trace.csv]
    isad problems list
    isad verify {concentration,sandwich,bias} --config exp.cfg [--out out.csv]
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import config as cfgmod
from .driver import run as run_driver
from .errors import ConfigurationError
from .problems import PROBLEM_KINDS
from .verify import (
    bias_identity_check,
    concentration_experiment,
    eig_sandwich_experiment,
    write_bias_csv,
    write_concentration_csv,
    write_sandwich_csv,
)

_PROBLEM_KEYS = {
    "tikhonov": "problem.n, problem.seed, problem.reg | problem.Gamma, "
    "problem.H, problem.g, problem.noise",
    "max_sv": "problem.n, problem.seed, problem.phi_weight, dist.* (optional override)",
    "irl": "problem.N, problem.seed, problem.G, problem.f_inv, problem.noise",
    "quadratic": "problem.n, problem.seed",
}


def _cmd_run(args) -> int:
    cfg = cfgmod.parse_config(args.config)
    model, dist, info = cfgmod.build_problem(cfg)
    run_config = cfgmod.build_run_config(
        cfg, dist.n, dist, model, seed=args.seed, out=args.out
    )
    final, rows = run_driver(run_config, dist, model)
    last = rows[-1]
    print(
        f"{model.name}: {last.t} rounds, beta={final.beta:.6g}, "
        f"dx={last.dx:.3e}, feas={last.feas:.3e}, "
        f"kkt=({last.r_prox:.3e}, {last.r_grad:.3e}, {last.r_feas:.3e})"
    )
    if "solution" in info:
        err = np.linalg.norm(final.x - info["solution"]) / (
            1.0 + np.linalg.norm(info["solution"])
        )
        print(f"distance to analytic solution: {err:.3e}")
    if "sigma_max" in info:
        ratio = np.linalg.norm(dist.base_mean @ final.x) / np.linalg.norm(final.x)
        print(f"achieved ratio {ratio:.6g} vs sigma_max {info['sigma_max']:.6g}")
    if args.out:
        print(f"trace written to {args.out}")
    return 0


def _cmd_problems(args) -> int:
    if args.action != "list":
        raise ConfigurationError(f"unknown problems action {args.action!r}")
    for kind in PROBLEM_KINDS:
        print(f"{kind}: {_PROBLEM_KEYS[kind]}")
    return 0


def _cmd_verify(args) -> int:
    cfg = cfgmod.parse_config(args.config)
    dist = cfgmod.build_distribution(cfg)
    regime = cfgmod.build_regime(cfg, default_subgaussian=dist.subgaussian)
    seed = cfgmod.get_int(cfg, "seed", 0)
    if args.experiment == "concentration":
        report = concentration_experiment(
            dist,
            regime,
            t_max=cfgmod.get_int(cfg, "verify.t_max", 30),
            trials=cfgmod.get_int(cfg, "verify.trials", 200),
            seed=seed,
        )
        first = report.first_round_below(0.05)
        print(
            f"concentration: q_1={report.q[0]:.3f}, q_last={report.q[-1]:.3f}, "
            f"first round with q<0.05: {first}"
        )
        if args.out:
            write_concentration_csv(report, args.out)
    elif args.experiment == "sandwich":
        report = eig_sandwich_experiment(
            dist,
            regime,
            eps_prime=cfgmod.get_float(cfg, "verify.eps_prime", 0.25),
            t_max=cfgmod.get_int(cfg, "verify.t_max", 50),
            trials=cfgmod.get_int(cfg, "verify.trials", 200),
            seed=seed,
        )
        achieved = report.stable_round[report.stable_round > 0]
        median = int(np.median(achieved)) if achieved.size else -1
        print(
            f"sandwich: fraction stable {report.fraction_stable:.3f}, "
            f"median stable round {median}"
        )
        if args.out:
            write_sandwich_csv(report, args.out)
    else:
        n = dist.n
        report = bias_identity_check(
            x=cfgmod.get_vector(cfg, "bias.x", n, default=np.ones(n)),
            y=cfgmod.get_vector(cfg, "bias.y", n, default=np.zeros(n)),
            z=cfgmod.get_vector(cfg, "bias.z", n, default=np.zeros(n)),
            beta=cfgmod.get_float(cfg, "bias.beta", 1.0),
            dist=dist,
            samples_per_estimate=cfgmod.get_int(cfg, "verify.samples_per_estimate", 4),
            trials=cfgmod.get_int(cfg, "verify.trials", 10_000),
            seed=seed,
        )
        print(
            f"bias: lhs={report.lhs:.6g} rhs={report.rhs:.6g} "
            f"gap={report.gap:.3e} ({report.z_score:.2f} standard errors)"
        )
        if args.out:
            write_bias_csv(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isad",
        description="Iterative sampling alternating directions solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the solver from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_problems = sub.add_parser("problems", help="inspect bundled problems")
    p_problems.add_argument("action", choices=["list"])
    p_problems.set_defaults(func=_cmd_problems)

    p_verify = sub.add_parser("verify", help="run a verification experiment")
    p_verify.add_argument(
        "experiment", choices=["concentration", "sandwich", "bias"]
    )
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--out", default=None)
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
