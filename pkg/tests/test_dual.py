import numpy as np
import pytest

from phidiv import (CHI2, HELLINGER, KL, KLM, DomainError, RankDeficiencyError,
                    WeightedSample, chi2_closed_form, el_reduced_solve,
                    get_model, solve_inner)
from phidiv.dual import dual_grad_hess, dual_objective

from conftest import primal_grid, primal_quadratic, random_feasible_instance

MEAN = get_model("mean")
MV = get_model("mean-variance")
S01 = WeightedSample.from_points(np.array([0.0, 1.0]))
S02 = WeightedSample.from_points(np.array([0.0, 2.0]))
S012 = WeightedSample.from_points(np.array([0.0, 1.0, 2.0]))


def test_dual_objective_values():
    for fam in (KLM, KL, CHI2, HELLINGER):
        assert dual_objective(fam, MEAN, S01, [1.0], np.zeros(2)) == 0.0
    assert dual_objective(CHI2, MEAN, S01, [1.0], np.array([1.0, 2.0])) \
        == pytest.approx(0.5, abs=1e-12)
    assert dual_objective(KLM, MEAN, S01, [1.0], np.array([2.0, 0.0])) == -np.inf


def test_dual_grad_hess_at_zero():
    grad, hess = dual_grad_hess(KL, MV, S012, [0.5], np.zeros(3))
    g = MV.g_values(S012.points, np.array([0.5]))
    A = np.hstack([np.ones((3, 1)), g])
    assert np.allclose(grad, -S012.weights @ A + np.eye(3)[0])
    assert np.allclose(hess, -(A * S012.weights[:, None]).T @ A)
    evals = np.linalg.eigvalsh(hess)
    assert np.all(evals <= 1e-8)


def test_dual_grad_infeasible_raises():
    with pytest.raises(DomainError):
        dual_grad_hess(KLM, MEAN, S01, [1.0], np.array([2.0, 0.0]))


def test_grad_matches_finite_differences(rng):
    theta = np.array([0.5])
    t = np.array([0.1, -0.2, 0.05])
    grad, hess = dual_grad_hess(HELLINGER, MV, S012, theta, t)
    h = 1e-6
    for k in range(3):
        tp = t.copy(); tp[k] += h
        tm = t.copy(); tm[k] -= h
        fd = (dual_objective(HELLINGER, MV, S012, theta, tp)
              - dual_objective(HELLINGER, MV, S012, theta, tm)) / (2.0 * h)
        assert grad[k] == pytest.approx(fd, abs=1e-6)


def test_chi2_closed_form_worked_example():
    sol = chi2_closed_form(MEAN, S01, [1.0])
    assert np.allclose(sol.t, [1.0, 2.0], atol=1e-10)
    assert sol.objective == pytest.approx(0.5, abs=1e-10)
    assert np.allclose(sol.weights, [0.0, 1.0], atol=1e-10)


def test_chi2_closed_form_zero_case():
    sol = chi2_closed_form(MEAN, S02, [1.0])
    assert np.allclose(sol.t, [0.0, 0.0], atol=1e-12)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)


def test_chi2_closed_form_mean_variance():
    s = WeightedSample.from_points(np.array([-1.0, 0.0, 1.0]))
    sol = chi2_closed_form(MV, s, [2.0 / 3.0])
    q = sol.weights
    g = MV.g_values(s.points, np.array([2.0 / 3.0]))
    assert abs(q.sum() - 1.0) <= 1e-12
    assert np.max(np.abs(q @ g)) <= 1e-12
    direct = solve_inner(CHI2, MV, s, [2.0 / 3.0])
    assert np.allclose(sol.t, direct.t, atol=1e-8)


def test_chi2_closed_form_singular():
    s = WeightedSample.from_points(np.array([1.0, 1.0, 1.0]))
    with pytest.raises(RankDeficiencyError):
        chi2_closed_form(MEAN, s, [1.0])


def test_solve_inner_exact_fit():
    for fam in (KLM, KL, CHI2, HELLINGER):
        sol = solve_inner(fam, MEAN, S02, [1.0])
        assert sol.converged
        assert np.allclose(sol.t, 0.0, atol=1e-8)
        assert abs(sol.objective) <= 1e-12
        assert np.allclose(sol.weights, 0.5, atol=1e-8)


def test_solve_inner_chi2_worked_example():
    sol = solve_inner(CHI2, MEAN, S01, [1.0])
    assert sol.converged
    assert np.allclose(sol.t, [1.0, 2.0], atol=1e-10)
    assert sol.objective == pytest.approx(0.5, abs=1e-10)
    assert np.allclose(sol.weights, [0.0, 1.0], atol=1e-10)


def test_el_unbounded_on_hull_boundary():
    sol = solve_inner(KLM, MEAN, S01, [1.0])
    assert sol.status == "unbounded"
    assert sol.weights is None


def test_el_reduced_value():
    # scalar first-order condition sum g_i / (1 + t g_i) = 0, g = {-.5,.5,1.5}
    sol = el_reduced_solve(MEAN, S012, [0.5])
    assert sol.converged
    assert sol.diagnostics["reduced_t"][0] == pytest.approx(0.954, abs=1e-3)
    assert sol.t[0] == 0.0


def test_el_reduced_trivial():
    sol = el_reduced_solve(MEAN, S02, [1.0])
    assert sol.converged
    assert np.allclose(sol.t, 0.0, atol=1e-10)
    assert abs(sol.objective) <= 1e-12


def test_el_full_and_reduced_agree(rng):
    hits = 0
    for _ in range(40):
        model, sample, theta = random_feasible_instance(rng, "mean", n=6)
        full = solve_inner(KLM, model, sample, theta)
        red = el_reduced_solve(model, sample, theta)
        if not (full.converged and red.converged):
            continue
        hits += 1
        assert full.objective == pytest.approx(red.objective, abs=1e-8)
        assert abs(full.t[0]) <= 1e-8
        assert np.allclose(full.t, red.t, atol=1e-6)
        assert np.allclose(full.weights, red.weights, atol=1e-6)
    assert hits >= 20


def test_projection_constraints(rng):
    for fam in (KLM, KL, CHI2, HELLINGER):
        for _ in range(10):
            model, sample, theta = random_feasible_instance(rng, "mean", n=8)
            sol = solve_inner(fam, model, sample, theta)
            if not sol.converged:
                continue
            q = sol.weights
            g = model.g_values(sample.points, theta)
            assert abs(q.sum() - 1.0) <= 1e-8
            assert np.max(np.abs(q @ g)) <= 1e-8
            u = np.hstack([np.ones((sample.n, 1)), g]) @ sol.t
            assert fam.strictly_feasible(u, margin=0.0)
            assert sol.objective >= -1e-10


def test_warm_start_equivalence(rng):
    for fam in (KLM, KL, HELLINGER):
        for _ in range(10):
            model, sample, theta = random_feasible_instance(rng, "mean", n=6)
            a = solve_inner(fam, model, sample, theta)
            b = solve_inner(fam, model, sample, theta, init=np.zeros(2))
            if a.converged and b.converged:
                assert np.allclose(a.t, b.t, atol=1e-8)


def test_dual_equals_primal_quadratic(rng):
    for _ in range(30):
        model, sample, theta = random_feasible_instance(rng, "mean", n=5)
        sol = chi2_closed_form(model, sample, theta)
        val, q = primal_quadratic(model, sample, theta)
        assert sol.objective == pytest.approx(val, abs=1e-8)
        assert np.allclose(sol.weights, q, atol=1e-8)


def test_dual_equals_primal_grid(rng):
    checked = 0
    for fam in (KLM, KL, HELLINGER):
        for _ in range(8):
            model, sample, theta = random_feasible_instance(rng, "mean", n=4)
            sol = solve_inner(fam, model, sample, theta)
            if not sol.converged:
                continue
            oracle = primal_grid(fam, model, sample, theta)
            assert sol.objective == pytest.approx(oracle, abs=1e-4)
            checked += 1
    assert checked >= 12


def test_hessian_negative_semidefinite_along_path(rng):
    model, sample, theta = random_feasible_instance(rng, "mean", n=6)
    sol = solve_inner(KL, model, sample, theta)
    assert sol.converged
    for frac in np.linspace(0.0, 1.0, 11):
        _, hess = dual_grad_hess(KL, model, sample, theta, frac * sol.t)
        assert np.max(np.linalg.eigvalsh(hess)) <= 1e-8
