"""Inner concave maximization of the dual criterion for a fixed parameter.

For fixed theta the criterion is

    f(t) = t_0 - sum_i w_i * psi(t . (1, g(X_i, theta)))

maximized over the vectors t keeping every argument of psi strictly inside
the conjugate domain.  The maximizer yields the estimated divergence between
the constrained measure set and the sample, together with the projection
weights Q_i = w_i * psi'(t . gbar_i) (a signed measure in general).

The quadratic family makes the first-order system linear, giving a closed
form used both on its own and as a warm start for every other family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficiencyError
from .families import CHI2, KLM, DivergenceFamily
from .models import MomentModel, WeightedSample

OBJ_BOUND = 1e12        # objective beyond this: declare unbounded
T_BOUND = 1e8           # dual vector beyond this: declare unbounded
T_SOFT = 1e6            # gradient convergence beyond this norm: escape to infinity
STEP_GROWTH_RUNS = 5    # consecutive 10x step growths before unbounded


@dataclass
class DualSolution:
    t: np.ndarray
    objective: float
    weights: np.ndarray | None
    status: str            # converged | converged-boundary | unbounded | max-iterations
    iterations: int
    grad_norm: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status == "converged"

    def to_dict(self):
        return {
            "t": [float(v) for v in np.atleast_1d(self.t)],
            "objective": float(self.objective),
            "status": self.status,
            "iterations": self.iterations,
            "grad_norm": float(self.grad_norm),
            **{k: v for k, v in self.diagnostics.items() if np.isscalar(v)},
        }


def _augmented(model, sample, theta):
    g = model.g_values(sample.points, theta)
    return np.hstack([np.ones((g.shape[0], 1)), g])


def dual_objective(fam, model, sample, theta, t):
    """Value of the dual criterion; -inf when any psi argument leaves dom psi."""
    theta = model.check_theta(theta)
    A = _augmented(model, sample, theta)
    return _objective(fam, A, sample.weights, np.asarray(t, dtype=float), t0_index=0)


def dual_grad_hess(fam, model, sample, theta, t):
    """Gradient and Hessian of the dual criterion at a strictly feasible t."""
    theta = model.check_theta(theta)
    A = _augmented(model, sample, theta)
    t = np.asarray(t, dtype=float)
    u = A @ t
    if not fam.strictly_feasible(u, margin=0.0):
        from .errors import DomainError
        raise DomainError("t is not strictly feasible for this sample")
    return _grad_hess(fam, A, sample.weights, t, t0_index=0)


def _objective(fam, A, w, t, t0_index):
    u = A @ t
    vals = np.atleast_1d(fam.psi(u))
    if not np.all(np.isfinite(vals)):
        return -np.inf
    base = t[t0_index] if t0_index is not None else 0.0
    return float(base - w @ vals)


def _grad_hess(fam, A, w, t, t0_index):
    u = A @ t
    s1 = w * np.atleast_1d(fam.psi_d1(u))
    s2 = w * np.atleast_1d(fam.psi_d2(u))
    grad = -(A.T @ s1)
    if t0_index is not None:
        grad[t0_index] += 1.0
    hess = -((A * s2[:, None]).T @ A)
    return grad, hess


def _newton_ascent(fam, A, w, t0, *, t0_index, tol, max_iter, margin):
    """Damped Newton with backtracking kept strictly feasible.

    Returns (t, objective, status, iterations, grad_norm, diagnostics).
    """
    t = np.array(t0, dtype=float)
    f = _objective(fam, A, w, t, t0_index)
    diag = {"ridge_used": False, "backtracks": 0}
    if not np.isfinite(f):
        return t, f, "max-iterations", 0, np.inf, diag
    grad = np.zeros_like(t)
    gnorm = np.inf
    prev_step = None
    growth_run = 0
    status = "max-iterations"
    it = 0
    for it in range(1, max_iter + 1):
        grad, hess = _grad_hess(fam, A, w, t, t0_index)
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= tol * (1.0 + abs(f)):
            # a vanishing gradient at an enormous iterate is the slow escape
            # of a log-type criterion toward its boundary, not an optimum
            status = "unbounded" if np.max(np.abs(t)) > T_SOFT else "converged"
            break
        neg_h = -hess
        step = _solve_psd(neg_h, grad, diag)
        gts = float(grad @ step)
        if not np.all(np.isfinite(step)) or gts <= 0.0:
            step = grad / max(1.0, gnorm)  # steepest-ascent fallback
            gts = float(grad @ step)
        alpha = 1.0
        accepted = False
        blocked_by_domain = False
        cand = t
        fc = f
        for _ in range(60):
            cand = t + alpha * step
            u = A @ cand
            if fam.strictly_feasible(u, margin=margin):
                fc = _objective(fam, A, w, cand, t0_index)
                if np.isfinite(fc) and fc >= f + 1e-4 * alpha * gts:
                    accepted = True
                    break
            else:
                blocked_by_domain = True
            diag["backtracks"] += 1
            alpha *= 0.5
        if not accepted:
            if gnorm <= 1e-6 * (1.0 + abs(f)):
                status = "unbounded" if np.max(np.abs(t)) > T_SOFT else "converged"
            elif blocked_by_domain:
                status = "converged-boundary"
            else:
                status = "max-iterations"
            break
        snorm = float(np.max(np.abs(alpha * step)))
        if prev_step is not None and snorm >= 10.0 * prev_step > 0.0:
            growth_run += 1
        else:
            growth_run = 0
        prev_step = snorm
        t, f = cand, fc
        if f > OBJ_BOUND or np.max(np.abs(t)) > T_BOUND or growth_run >= STEP_GROWTH_RUNS:
            status = "unbounded"
            break
    return t, f, status, it, gnorm, diag


def _solve_psd(neg_h, grad, diag):
    ridge = 0.0
    for attempt in range(3):
        try:
            step = np.linalg.solve(neg_h + ridge * np.eye(neg_h.shape[0]), grad)
            if np.all(np.isfinite(step)):
                return step
        except np.linalg.LinAlgError:
            pass
        ridge = max(1e-12 * np.trace(neg_h), 1e-300) * 10.0 ** attempt
        diag["ridge_used"] = True
    return np.full_like(grad, np.nan)


def chi2_closed_form(model, sample, theta):
    """Exact dual solution for the quadratic family via one linear solve."""
    theta = model.check_theta(theta)
    A = _augmented(model, sample, theta)
    w = sample.weights
    gram = (A * w[:, None]).T @ A
    rhs = -(A.T @ w)
    rhs[0] += 1.0
    evals, evecs = np.linalg.eigh(gram)
    if evals[0] <= 1e-12 * max(evals[-1], 1.0):
        combo = np.round(evecs[:, 0], 6)
        raise RankDeficiencyError(
            f"singular Gram matrix: constraint combination {combo.tolist()} "
            "is degenerate on this sample")
    t = np.linalg.solve(gram, rhs)
    u = A @ t
    obj = float(t[0] - w @ np.atleast_1d(CHI2.psi(u)))
    weights = w * (1.0 + u)
    grad = rhs - gram @ t
    return DualSolution(t, obj, weights, "converged", 1,
                        float(np.max(np.abs(grad))), {"closed_form": True})


def _shrink_feasible(fam, A, t, margin):
    """Pull a candidate dual vector toward zero until strictly feasible."""
    t = np.array(t, dtype=float)
    for _ in range(80):
        if fam.strictly_feasible(A @ t, margin=max(margin, 1e-8)):
            return t
        t *= 0.5
    return np.zeros_like(t)


def solve_inner(fam, model, sample, theta, init=None, tol=1e-9,
                max_iter=200, margin=1e-10):
    """Maximize the dual criterion at fixed theta.

    Default initialization is the quadratic closed form shrunk into the
    feasible region, falling back to t = 0 (always feasible).
    """
    theta = model.check_theta(theta)
    A = _augmented(model, sample, theta)
    w = sample.weights
    dim = A.shape[1]
    if init is not None:
        t0 = _shrink_feasible(fam, A, np.asarray(init, dtype=float), margin)
    else:
        try:
            ws = chi2_closed_form(model, sample, theta).t
            t0 = _shrink_feasible(fam, A, ws, margin)
        except RankDeficiencyError:
            t0 = np.zeros(dim)
    if not np.isfinite(_objective(fam, A, w, t0, 0)):
        t0 = np.zeros(dim)
    t, f, status, iters, gnorm, diag = _newton_ascent(
        fam, A, w, t0, t0_index=0, tol=tol, max_iter=max_iter, margin=margin)
    weights = None
    if status in ("converged", "converged-boundary"):
        weights = w * np.atleast_1d(fam.psi_d1(A @ t))
    return DualSolution(t, f, weights, status, iters, gnorm, diag)


def el_reduced_solve(model, sample, theta, tol=1e-9, max_iter=200):
    """Reduced dual solve for the empirical-likelihood family.

    Maximizes sum_i w_i log(1 + lam . g(X_i, theta)) over the vectors lam
    with every log argument positive; the constant dual coordinate is known
    to vanish for this family and is omitted.  The returned solution is in
    the full-solver convention (t = (0, -lam)); the reduced vector itself is
    available as diagnostics["reduced_t"].
    """
    theta = model.check_theta(theta)
    g = model.g_values(sample.points, theta)
    w = sample.weights
    A = -g  # f(lam) = -sum w psi_KLm(-lam . g) = sum w log(1 + lam . g)
    lam0 = np.zeros(model.l)
    lam, f, status, iters, gnorm, diag = _newton_ascent(
        KLM, A, w, lam0, t0_index=None, tol=tol, max_iter=max_iter, margin=1e-10)
    t_full = np.concatenate([[0.0], -lam])
    weights = None
    if status in ("converged", "converged-boundary"):
        weights = w / (1.0 + g @ lam)
    diag = dict(diag)
    diag["reduced_t"] = lam
    return DualSolution(t_full, f, weights, status, iters, gnorm, diag)
