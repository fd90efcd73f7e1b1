"""Shared fixtures and independent oracles used across the test suite.

The oracles deliberately avoid the library's dual solver: the quadratic
primal is solved as a linearly-constrained least-squares problem via
Lagrange multipliers, and the general primal by brute-force grid search
over the affine set of feasible weight vectors.
"""

import numpy as np
import pytest

from phidiv import WeightedSample, get_model


def primal_quadratic(model, sample, theta):
    """Exact value of min 0.5 * sum w_i (r_i - 1)^2 s.t. sum w r gbar = e0.

    r_i = Q_i / w_i; stationarity gives r = 1 + B lam with B the augmented
    moment matrix, so the multipliers solve (B' W B) lam = e0 - B' w.
    """
    g = model.g_values(sample.points, np.atleast_1d(theta))
    B = np.hstack([np.ones((g.shape[0], 1)), g])
    w = sample.weights
    gram = (B * w[:, None]).T @ B
    rhs = -(B.T @ w)
    rhs[0] += 1.0
    lam = np.linalg.solve(gram, rhs)
    r = 1.0 + B @ lam
    return float(0.5 * w @ (r - 1.0) ** 2), w * r


def primal_grid(fam, model, sample, theta, box=30.0, rounds=12):
    """Brute-force primal divergence over the affine feasible set (n <= 4).

    Parametrizes every weight vector satisfying the constraints as a
    particular solution plus the constraint null space, then zooms a dense
    coefficient grid around the running minimum.
    """
    g = model.g_values(sample.points, np.atleast_1d(theta))
    n = g.shape[0]
    B = np.hstack([np.ones((n, 1)), g])
    w = sample.weights
    # constraints on q: B.T q = e0
    e0 = np.zeros(B.shape[1])
    e0[0] = 1.0
    q_p, *_ = np.linalg.lstsq(B.T, e0, rcond=None)
    _, s, vt = np.linalg.svd(B.T)
    null = vt[B.shape[1]:].T          # (n, k) basis of the null space
    k = null.shape[1]
    if k == 0:
        return float(np.sum(w * np.atleast_1d(fam.phi(q_p / w))))
    npts = 301 if k == 1 else 61
    lo = np.full(k, -box)
    hi = np.full(k, box)
    best_c = np.zeros(k)
    best = np.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[j], hi[j], npts) for j in range(k)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        q = q_p[None, :] + mesh @ null.T
        ratios = q / w[None, :]
        vals = np.sum(w[None, :] * fam.phi(ratios), axis=1)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        j = int(np.argmin(vals))
        if vals[j] < best:
            best = float(vals[j])
            best_c = mesh[j]
        half = (hi - lo) / npts * 2.0
        lo, hi = best_c - half, best_c + half
    return best


def random_feasible_instance(rng, model_name="mean", n=4):
    """Sample plus a theta strictly inside the hull of the moment values."""
    model = get_model(model_name)
    x = rng.normal(0.0, 1.0, size=n)
    sample = WeightedSample.from_points(x)
    if model_name == "mean":
        lo, hi = x.min(), x.max()
        theta = np.array([lo + (0.25 + 0.5 * rng.random()) * (hi - lo)])
    else:
        x2 = x ** 2
        lo, hi = x2.min(), x2.max()
        theta = np.array([lo + (0.25 + 0.5 * rng.random()) * (hi - lo)])
    return model, sample, theta


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
