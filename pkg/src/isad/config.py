"""Flat key-value config files and builders for runs and experiments.

Config syntax: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored. Vectors are comma- or space-separated numbers; matrices separate
rows with ``;``. A matrix/vector value that is not inline numeric is treated
as a path to a whitespace- or comma-delimited text grid.
"""

from __future__ import annotations

import os

import numpy as np

from .driver import RunConfig
from .errors import ConfigurationError
from .problems import (
    make_irl_toy,
    make_max_sv,
    make_quadratic_baseline,
    make_tikhonov,
)
from .sampling import DIST_KINDS, MatrixDistribution, SamplingRegime

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_config(path) -> dict:
    """Read a flat key-value file into a string-to-string dict."""
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}"
                )
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


def get_float(cfg, key, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigurationError(f"missing config key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigurationError(f"config key {key!r}: {exc}") from exc


def get_int(cfg, key, default=None) -> int:
    if key not in cfg:
        if default is None:
            raise ConfigurationError(f"missing config key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigurationError(f"config key {key!r}: {exc}") from exc


def get_bool(cfg, key, default=None) -> bool:
    if key not in cfg:
        if default is None:
            raise ConfigurationError(f"missing config key {key!r}")
        return default
    token = cfg[key].lower()
    if token in _TRUE:
        return True
    if token in _FALSE:
        return False
    raise ConfigurationError(f"config key {key!r}: not a boolean: {cfg[key]!r}")


def parse_vector(text: str) -> np.ndarray:
    tokens = text.replace(",", " ").split()
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ConfigurationError(f"not a numeric vector: {text!r}") from exc


def parse_matrix(text: str) -> np.ndarray:
    """Inline matrix ('1 0; 0 1') or path to a delimited text grid."""
    if ";" not in text and os.path.exists(text):
        return load_text_grid(text)
    try:
        rows = [parse_vector(row) for row in text.split(";")]
    except ConfigurationError:
        raise ConfigurationError(
            f"not an inline matrix and not an existing file: {text!r}"
        ) from None
    widths = {row.size for row in rows}
    if len(widths) != 1:
        raise ConfigurationError("matrix rows have inconsistent lengths")
    return np.vstack(rows)


def load_text_grid(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    delimiter = "," if "," in text else None
    return np.atleast_2d(np.loadtxt(path, delimiter=delimiter))


def get_vector(cfg, key, dim, default=None) -> np.ndarray:
    if key not in cfg:
        if default is None:
            raise ConfigurationError(f"missing config key {key!r}")
        return default
    text = cfg[key]
    if text == "zeros":
        return np.zeros(dim)
    if os.path.exists(text):
        return load_text_grid(text).ravel()
    vec = parse_vector(text)
    if vec.size != dim:
        raise ConfigurationError(f"config key {key!r}: expected {dim} entries")
    return vec


def build_distribution(cfg) -> MatrixDistribution:
    """Distribution from dist.* keys (kind, mean, noise_scale, subgaussian)."""
    kind = cfg.get("dist.kind")
    if kind is None:
        raise ConfigurationError("missing config key 'dist.kind'")
    if kind not in DIST_KINDS:
        raise ConfigurationError(f"dist.kind must be one of {DIST_KINDS}")
    if "dist.mean" not in cfg:
        raise ConfigurationError("missing config key 'dist.mean'")
    mean = parse_matrix(cfg["dist.mean"])
    return MatrixDistribution(
        kind,
        mean,
        noise_scale=get_float(cfg, "dist.noise_scale", 0.0),
        subgaussian=get_bool(cfg, "dist.subgaussian", False),
    )


def build_regime(cfg, default_subgaussian: bool) -> SamplingRegime:
    return SamplingRegime(
        epsilon=get_float(cfg, "regime.eps", 0.5),
        subgaussian=get_bool(cfg, "regime.subgaussian", default_subgaussian),
        scale=get_float(cfg, "theta_scale", 1.0),
    )


def build_problem(cfg):
    """Problem instance from problem.* keys; returns (model, dist, info)."""
    kind = cfg.get("problem.kind")
    if kind is None:
        raise ConfigurationError("missing config key 'problem.kind'")
    seed = get_int(cfg, "problem.seed", 0)
    if kind == "quadratic":
        n = get_int(cfg, "problem.n", 6)
        model, dist, x_star = make_quadratic_baseline(n, seed=seed)
        return model, dist, {"solution": x_star}
    if kind == "tikhonov":
        n = get_int(cfg, "problem.n", 8)
        rng = np.random.default_rng(seed)
        if "problem.H" in cfg:
            H = parse_matrix(cfg["problem.H"])
        else:
            u, _, vt = np.linalg.svd(rng.standard_normal((n, n)))
            H = u @ np.diag(np.linspace(0.7, 1.5, n)) @ vt
        if "problem.Gamma" in cfg:
            Gamma = parse_matrix(cfg["problem.Gamma"])
        else:
            Gamma = get_float(cfg, "problem.reg", 0.5) * np.eye(n)
        g = get_vector(cfg, "problem.g", n, default=rng.standard_normal(n))
        noise = get_float(cfg, "problem.noise", 0.0)
        model, dist, f_star = make_tikhonov(n, H, noise, Gamma, g, seed=seed)
        return model, dist, {"solution": f_star}
    if kind == "irl":
        N = get_int(cfg, "problem.N", 3)
        rng = np.random.default_rng(seed)
        G = get_vector(cfg, "problem.G", N, default=rng.uniform(0.8, 2.0, N))
        f_inv = get_vector(cfg, "problem.f_inv", N, default=rng.uniform(-2.0, 2.0, N))
        noise = get_float(cfg, "problem.noise", 0.25)
        model, dist = make_irl_toy(N, G, f_inv, noise_scale=noise, seed=seed)
        return model, dist, {}
    if kind == "max_sv":
        n = get_int(cfg, "problem.n", 4)
        if "dist.kind" in cfg:
            dist = build_distribution(cfg)
        else:
            rng = np.random.default_rng(seed)
            u, _, vt = np.linalg.svd(rng.standard_normal((n, n)))
            base = u @ np.diag(np.linspace(2.0, 0.6, n)) @ vt
            dist = MatrixDistribution(
                "entrywise-bounded-uniform", base, noise_scale=0.1, subgaussian=True
            )
        model, oracle = make_max_sv(
            n, dist, seed=seed, phi_weight=get_float(cfg, "problem.phi_weight", 24.0)
        )
        return model, dist, {"sigma_max": oracle[0], "direction": oracle[1]}
    raise ConfigurationError(f"unknown problem.kind {kind!r}")


def build_run_config(cfg, dim, dist, model, seed=None, out=None) -> RunConfig:
    regime = build_regime(cfg, default_subgaussian=dist.subgaussian)
    default_apo = "bounded" if model.smooth.hessian_bound is not None else "general"
    x0_default = np.zeros(dim)
    if model.name == "max_sv":
        rng = np.random.default_rng(get_int(cfg, "problem.seed", 0))
        x0_default = rng.standard_normal(dim)
        x0_default /= np.linalg.norm(x0_default)
    tol_dx = get_float(cfg, "tol_dx", -1.0)
    tol_kkt = get_float(cfg, "tol_kkt", -1.0)
    return RunConfig(
        dim=dim,
        x0=get_vector(cfg, "x0", dim, default=x0_default),
        z0=get_vector(cfg, "z0", dim, default=np.zeros(dim)),
        beta0=get_float(cfg, "beta0", 1.0),
        regime=regime,
        apo_kind=cfg.get("apo.kind", default_apo),
        apo_eps=get_float(cfg, "apo.eps", 0.1),
        max_rounds=get_int(cfg, "max_rounds", 2000),
        tol_dx=None if tol_dx < 0 else tol_dx,
        tol_kkt=None if tol_kkt < 0 else tol_kkt,
        seed=get_int(cfg, "seed", 0) if seed is None else seed,
        out=out,
        inner_tol=get_float(cfg, "inner_tol", 1e-8),
        max_inner=get_int(cfg, "max_inner", 10_000),
        x_solver=cfg.get("x_solver", "auto"),
        guard=get_float(cfg, "guard", 1e8),
    )
