"""Shared independent oracles: finite differences, grid minimizers, prox checks."""

import math

import numpy as np


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h * h)
    return 0.5 * (H + H.T)


def brute_min_1d(f, lo, hi, coarse=2001, refine=90):
    """Grid scan plus golden-section refinement around the best cell."""
    xs = np.linspace(lo, hi, coarse)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmin(vals))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(refine):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def prox_objective(p, tau, u, y):
    d = np.asarray(y, dtype=float) - np.asarray(u, dtype=float)
    return tau * p.value(np.asarray(y, dtype=float)) + 0.5 * float(d @ d)


def assert_beats_competitors(p, tau, u, rng, n_competitors=100, tol=1e-9):
    y = p.prox(tau, u)
    base = prox_objective(p, tau, u, y)
    for _ in range(n_competitors):
        scale = rng.choice([0.01, 0.3, 2.0])
        comp = y + scale * rng.standard_normal(np.asarray(u).size)
        assert base <= prox_objective(p, tau, u, comp) + tol
