"""Hypothesis tests, confidence regions, power approximation, sample size.

Three tests are provided, all based on twice the sample size times an
estimated divergence:

  * model test (over-identified models only): chi-square limit with
    l - d degrees of freedom;
  * simple parameter test at a fixed theta: chi-square limit with l degrees;
  * ratio test (fixed theta against the unrestricted fit): chi-square limit
    with d degrees.

An unbounded inner solve at the tested theta means the constraint set is
empty in the direction of the data (for the empirical-likelihood family:
theta outside the convex hull); this is overwhelming evidence against the
null, so it is reported as a rejection carrying an explanatory flag rather
than as an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import chi2_cdf, chi2_quantile, normal_cdf, normal_quantile
from .dual import solve_inner
from .errors import NotApplicableError
from .estimate import EstimateOptions, estimate

INF = float("inf")


@dataclass
class TestReport:
    kind: str
    statistic: float
    df: int
    p_value: float
    critical_value: float
    alpha: float
    decision: str          # "reject" | "accept"
    variance_sigma2: float | None = None
    flag: str | None = None

    def to_dict(self):
        out = {
            "kind": self.kind,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "decision": self.decision,
        }
        if self.variance_sigma2 is not None:
            out["variance_sigma2"] = self.variance_sigma2
        if self.flag is not None:
            out["flag"] = self.flag
        return out


def _report(kind, stat, df, alpha, sigma2=None, flag=None):
    crit = chi2_quantile(1.0 - alpha, df)
    if math.isfinite(stat):
        p = 1.0 - chi2_cdf(max(stat, 0.0), df)
    else:
        p = 0.0
    decision = "reject" if stat > crit else "accept"
    return TestReport(kind, stat, df, p, crit, alpha, decision, sigma2, flag)


def test_model(fam, model, sample, alpha=0.05, options=None):
    """Test whether any parameter value satisfies all moment constraints."""
    if model.l <= model.d:
        raise NotApplicableError(
            "model test needs over-identification (more moment functions than "
            "parameters); the statistic degenerates to zero otherwise")
    est = estimate(fam, model, sample, options=options)
    stat = 2.0 * sample.n * est.divergence_hat
    rep = _report("model-test", stat, model.l - model.d, alpha, est.sigma2_hat)
    return rep, est


def test_theta_simple(fam, model, sample, theta, alpha=0.05):
    """Test the fixed-theta constraint set against everything else."""
    sol = solve_inner(fam, model, sample, theta)
    if sol.status != "converged":
        return _report("simple-theta-test", INF, model.l, alpha,
                       flag=f"inner solve {sol.status}; treated as rejection")
    n = sample.n
    stat = 2.0 * n * sol.objective
    # variance of the criterion integrand, for power work
    from .dual import _augmented
    u = _augmented(model, sample, theta) @ sol.t
    m_vals = sol.t[0] - np.atleast_1d(fam.psi(u))
    mbar = float(sample.weights @ m_vals)
    sigma2 = float(sample.weights @ (m_vals ** 2) - mbar ** 2)
    return _report("simple-theta-test", stat, model.l, alpha, sigma2)


def test_theta_composite(fam, model, sample, theta, alpha=0.05, options=None):
    """Ratio test of a fixed theta against the unrestricted minimum."""
    est = estimate(fam, model, sample, options=options)
    sol = solve_inner(fam, model, sample, theta)
    if sol.status != "converged":
        return _report("composite-theta-test", INF, model.d, alpha,
                       flag=f"inner solve {sol.status}; treated as rejection")
    stat = 2.0 * sample.n * (sol.objective - est.divergence_hat)
    return _report("composite-theta-test", stat, model.d, alpha, est.sigma2_hat)


def confidence_region(fam, model, sample, alpha, grid, options=None):
    """Grid points whose ratio statistic stays below the chi-square quantile.

    grid: array of parameter values, shape (npts,) for d = 1 or (npts, d).
    Returns (accepted_points, empty_flag).
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 1 and grid.shape[1] != model.d:
        grid = grid.T
    est = estimate(fam, model, sample, options=options)
    crit = chi2_quantile(1.0 - alpha, model.d)
    n = sample.n
    accepted = []
    warm = est.t_hat
    for theta in grid:
        sol = solve_inner(fam, model, sample, theta, init=warm)
        if sol.status != "converged":
            continue
        stat = 2.0 * n * (sol.objective - est.divergence_hat)
        if stat <= crit:
            accepted.append(theta)
    pts = np.asarray(accepted).reshape(-1, model.d)
    return pts, pts.shape[0] == 0


def power_approx(n, alpha, df, div, sigma):
    """Normal approximation to the power of a divergence test at level alpha.

    div is the population divergence of the alternative, sigma the standard
    deviation of the criterion integrand at the pseudo-true optimum.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if div < 0.0:
        raise ValueError("divergence must be nonnegative")
    if n < 1:
        raise ValueError("n must be at least 1")
    q = chi2_quantile(1.0 - alpha, df)
    return 1.0 - normal_cdf(math.sqrt(n) / sigma * (q / (2.0 * n) - div))


def sample_size_real(beta, alpha, df, div, sigma):
    """Positive root n0 of the power equation (before integer rounding)."""
    if div <= 0.0:
        raise ValueError("divergence must be positive to plan a sample size")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if not 0.0 < beta < 1.0:
        raise ValueError("target power must lie in (0, 1)")
    q = chi2_quantile(1.0 - alpha, df)
    z = normal_quantile(1.0 - beta)
    if z == 0.0:
        return q / (2.0 * div)  # beta = 1/2: closed-form collapse
    a = sigma ** 2 * z ** 2
    b = q * div
    root = math.sqrt(a * (a + 2.0 * b))
    # the positive root of the power equation switches branch at beta = 1/2
    if z > 0.0:
        return ((a + b) - root) / (2.0 * div ** 2)
    return ((a + b) + root) / (2.0 * div ** 2)


def sample_size(beta, alpha, df, div, sigma):
    """Smallest integer sample size achieving power beta (approximately)."""
    return int(math.floor(sample_size_real(beta, alpha, df, div, sigma))) + 1
