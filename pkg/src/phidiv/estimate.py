"""Outer minimization over the parameter of the profiled dual criterion.

The profile value at theta is the inner dual maximum; its theta-gradient is
available in closed form because the inner first-order condition wipes out
the dependence of the inner maximizer on theta (envelope argument).  The
outer search is a projected BFGS descent inside the parameter box, run from
several starts, with the quadratic-family closed form used to pick the
leading start.

Estimation also fills the asymptotic variance objects: the efficient
parameter covariance under the model, the scalar variance of the divergence
estimate, and the joint sandwich covariance of the dual vector and the
parameter that remains valid under misspecification.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dual import DualSolution, _augmented, chi2_closed_form, solve_inner
from .errors import EstimationError, RankDeficiencyError
from .families import DivergenceFamily
from .models import MomentModel, WeightedSample

INF = float("inf")


@dataclass(frozen=True)
class EstimateOptions:
    n_starts: int = 5
    seed: int = 0
    outer_tol: float = 1e-8
    outer_max_iter: int = 100
    inner_tol: float = 1e-9
    inner_max_iter: int = 200
    theta0: tuple | None = None  # explicit extra start, overrides nothing else


FAST_OPTIONS = EstimateOptions(n_starts=1, outer_tol=1e-7, outer_max_iter=60)


@dataclass
class EstimationResult:
    theta_hat: np.ndarray
    t_hat: np.ndarray
    divergence_hat: float
    V_hat: np.ndarray
    sigma2_hat: float
    W_hat: np.ndarray
    S_hat: np.ndarray
    M_hat: np.ndarray
    inner: DualSolution
    diagnostics: dict = field(default_factory=dict)

    def stderr(self, n):
        """Per-coordinate standard errors sqrt(V_ii / n)."""
        return np.sqrt(np.clip(np.diag(self.V_hat), 0.0, None) / n)

    def to_dict(self, n=None):
        out = {
            "theta_hat": [float(v) for v in self.theta_hat],
            "t_hat": [float(v) for v in self.t_hat],
            "divergence_hat": float(self.divergence_hat),
            "sigma2_hat": float(self.sigma2_hat),
            "V_hat": self.V_hat.tolist(),
            "diagnostics": self.diagnostics,
        }
        if n is not None:
            out["stderr"] = [float(v) for v in self.stderr(n)]
        return out


def profile_objective(fam, model, sample, theta, init_t=None,
                      inner_tol=1e-9, inner_max_iter=200):
    """Inner dual maximum at theta, with the inner solution.

    An unbounded or stalled inner solve yields +inf; the solution object
    carries the status, so the outer search can steer away without aborting.
    """
    sol = solve_inner(fam, model, sample, theta, init=init_t,
                      tol=inner_tol, max_iter=inner_max_iter)
    if sol.status in ("converged", "converged-boundary"):
        return sol.objective, sol
    return INF, sol


def profile_gradient(fam, model, sample, theta, inner):
    """Theta-gradient of the profile with the dual vector held fixed."""
    if inner.status != "converged":
        raise EstimationError(f"inner solve did not converge (status={inner.status})")
    return _profile_grad(fam, model, sample, theta, inner.t)


def _profile_grad(fam, model, sample, theta, t):
    theta = model.check_theta(theta)
    A = _augmented(model, sample, theta)
    jac = model.jac_values(sample.points, theta)
    u = A @ t
    s1 = sample.weights * np.atleast_1d(fam.psi_d1(u))
    jt = np.einsum("ild,l->id", jac, t[1:])
    return -(s1 @ jt)


def _latin_hypercube(rng, n, lo, hi):
    d = lo.shape[0]
    pts = np.empty((n, d))
    for k in range(d):
        strata = (np.arange(n) + rng.random(n)) / n
        pts[:, k] = lo[k] + rng.permutation(strata) * (hi[k] - lo[k])
    return pts


def _pick_starts(model, sample, options):
    rng = np.random.Generator(np.random.PCG64(options.seed))
    lo, hi = model.theta_lo, model.theta_hi
    pool = _latin_hypercube(rng, max(8, 2 * options.n_starts), lo, hi)
    # moment-style start: the candidate with the smallest quadratic profile
    scores = []
    for theta in pool:
        try:
            scores.append(chi2_closed_form(model, sample, theta).objective)
        except RankDeficiencyError:
            scores.append(INF)
    order = np.argsort(scores, kind="stable")
    lead = pool[order[0]]
    # refine the leading candidate against the quadratic profile, whose inner
    # problem is a closed-form linear solve; this lands every family's search
    # near the moment-type estimate, where the dual stays bounded
    from .families import CHI2
    outcome, _ = _outer_minimize(CHI2, model, sample, lead, options)
    if outcome is not None:
        lead = outcome[0]
    starts = []
    if options.theta0 is not None:
        starts.append(np.atleast_1d(np.asarray(options.theta0, dtype=float)))
    starts.append(lead)
    starts.extend(_latin_hypercube(rng, max(options.n_starts - 1, 0), lo, hi))
    return starts


def _outer_minimize(fam, model, sample, theta0, options):
    """Projected BFGS descent of the profile from one start."""
    lo, hi = model.theta_lo, model.theta_hi
    d = model.d
    theta = model.clip_theta(theta0)
    val, sol = profile_objective(fam, model, sample, theta, None,
                                 options.inner_tol, options.inner_max_iter)
    if not np.isfinite(val) or sol.status != "converged":
        return None, {"start": theta.tolist(), "reason": f"infeasible start ({sol.status})"}
    grad = _profile_grad(fam, model, sample, theta, sol.t)
    hinv = np.eye(d)
    iters = 0
    for iters in range(1, options.outer_max_iter + 1):
        pg = grad.copy()
        pg[(theta <= lo) & (grad > 0)] = 0.0
        pg[(theta >= hi) & (grad < 0)] = 0.0
        if np.max(np.abs(pg)) <= options.outer_tol * (1.0 + abs(val)):
            break
        p = -(hinv @ grad)
        if p @ grad >= 0.0:
            p = -grad
        alpha, accepted = 1.0, False
        cand, cval, csol = theta, val, sol
        for _ in range(40):
            cand = np.clip(theta + alpha * p, lo, hi)
            s = cand - theta
            if np.max(np.abs(s)) < 1e-14 * (1.0 + np.max(np.abs(theta))):
                break
            cval, csol = profile_objective(fam, model, sample, cand, sol.t,
                                           options.inner_tol, options.inner_max_iter)
            if np.isfinite(cval) and csol.status == "converged" \
                    and cval <= val + 1e-4 * float(grad @ s):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        grad_new = _profile_grad(fam, model, sample, cand, csol.t)
        s = cand - theta
        y = grad_new - grad
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            eye = np.eye(d)
            left = eye - rho * np.outer(s, y)
            hinv = left @ hinv @ left.T + rho * np.outer(s, s)
        else:
            hinv = np.eye(d)
        theta, val, sol, grad = cand, cval, csol, grad_new
    return (theta, val, sol, iters), {"start": np.asarray(theta0).tolist(),
                                      "iterations": iters, "value": val}


def variance_blocks(fam, model, sample, theta, t):
    """Empirical variance objects evaluated at (theta, t).

    Returns (V, sigma2, S, M, W): the efficient parameter covariance, the
    scalar variance of the divergence estimate, the joint second-derivative
    matrix, the outer-product matrix of first derivatives, and the sandwich
    S^-1 M S^-1.
    """
    theta = model.check_theta(theta)
    w = sample.weights
    g = model.g_values(sample.points, theta)
    jac = model.jac_values(sample.points, theta)
    A = np.hstack([np.ones((g.shape[0], 1)), g])
    u = A @ t
    s1 = np.atleast_1d(fam.psi_d1(u))
    s2 = np.atleast_1d(fam.psi_d2(u))

    ghat = np.einsum("i,ild->ld", w, jac)
    omega = (g * w[:, None]).T @ g
    try:
        v = np.linalg.inv(ghat.T @ np.linalg.solve(omega, ghat))
    except np.linalg.LinAlgError:
        raise RankDeficiencyError("singular moment covariance matrix")

    m_vals = t[0] - np.atleast_1d(fam.psi(u))
    mbar = float(w @ m_vals)
    sigma2 = float(w @ (m_vals ** 2) - mbar ** 2)

    jt = np.einsum("ild,l->id", jac, t[1:])
    dm_dt = -(A * s1[:, None])
    dm_dt[:, 0] += 1.0
    dm_dth = -(s1[:, None] * jt)

    s11 = -((A * (w * s2)[:, None]).T @ A)
    s12 = -((A * (w * s2)[:, None]).T @ jt)
    s12[1:, :] -= np.einsum("i,ild->ld", w * s1, jac)

    d = model.d
    s22 = np.empty((d, d))
    h = 1e-5 * (1.0 + np.abs(theta))
    for k in range(d):
        tp = theta.copy(); tp[k] += h[k]
        tm = theta.copy(); tm[k] -= h[k]
        gp = _theta_grad_raw(fam, model, sample, tp, t)
        gm = _theta_grad_raw(fam, model, sample, tm, t)
        s22[:, k] = (gp - gm) / (2.0 * h[k])
    s22 = 0.5 * (s22 + s22.T)

    s_mat = np.block([[s11, s12], [s12.T, s22]])
    vmat = np.hstack([dm_dt, dm_dth])
    m_mat = (vmat * w[:, None]).T @ vmat
    try:
        x = np.linalg.solve(s_mat, m_mat)
        w_mat = np.linalg.solve(s_mat, x.T).T
        w_mat = 0.5 * (w_mat + w_mat.T)
    except np.linalg.LinAlgError:
        w_mat = np.full_like(s_mat, np.nan)
    return v, sigma2, s_mat, m_mat, w_mat


def _theta_grad_raw(fam, model, sample, theta, t):
    """Theta-gradient of the criterion with t fixed, without box checks."""
    g = model.g_values(sample.points, theta)
    jac = model.jac_values(sample.points, theta)
    u = t[0] + g @ t[1:]
    s1 = sample.weights * np.atleast_1d(fam.psi_d1(u))
    jt = np.einsum("ild,l->id", jac, t[1:])
    return -(s1 @ jt)


def estimate(fam, model, sample, options=None):
    """Full minimum-divergence estimation: parameter, divergence, variances."""
    options = options or EstimateOptions()
    if sample.n <= model.l:
        raise EstimationError(
            f"need more observations ({sample.n}) than moment functions ({model.l})")
    best = None
    per_start = []
    for idx, start in enumerate(_pick_starts(model, sample, options)):
        outcome, diag = _outer_minimize(fam, model, sample, start, options)
        diag["index"] = idx
        per_start.append(diag)
        if outcome is None:
            continue
        theta, val, sol, iters = outcome
        if best is None or val < best[1] - 0.0:
            best = (theta, val, sol, iters)
    if best is None:
        raise EstimationError("all starts failed", per_start)
    theta, val, sol, iters = best
    v, sigma2, s_mat, m_mat, w_mat = variance_blocks(fam, model, sample, theta, sol.t)
    diagnostics = {"outer_iterations": iters, "starts": per_start,
                   "inner_status": sol.status}
    return EstimationResult(theta, sol.t, val, v, sigma2, w_mat, s_mat, m_mat,
                            sol, diagnostics)


def population_estimate(fam, model, p0, options=None):
    """Pseudo-true quantities from a finite-support reference distribution.

    Runs the same algorithm on the weighted atoms of p0; the result is read
    as (theta*, t*(theta*), population divergence, sigma^2(theta*)) for
    power approximation under misspecification.
    """
    return estimate(fam, model, p0, options=options)
