"""Seeded Monte Carlo harness: calibration, empirical power, power curves.

Every replicate draws its own random stream from the tuple
(master seed, cell index, replicate index) through numpy's SeedSequence, so
results are a pure function of the plan and independent of execution order
or worker count.  Cells (one per (epsilon, n) pair) are independent work
items; with threads > 1 they are farmed out to a process pool and merged in
deterministic order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationError, PhidivError
from .estimate import EstimateOptions, population_estimate
from .families import family as resolve_family
from .inference import power_approx, test_model
from .models import WeightedSample, get_model

DEFAULT_N_LIST = (50, 100, 200, 500)
DEFAULT_RUNS = 1000
MC_OPTIONS = EstimateOptions(n_starts=1, outer_tol=1e-7, outer_max_iter=60,
                             inner_tol=1e-8)


@dataclass(frozen=True)
class SimulationPlan:
    generator: tuple = ("uniform", -1.0, 1.0)
    model: str = "mean-variance"
    family: str = "KLm"
    n_list: tuple = DEFAULT_N_LIST
    runs: int = DEFAULT_RUNS
    alpha: float = 0.05
    epsilon_grid: tuple = tuple(np.round(np.linspace(0.1, 1.0, 10), 10))
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.generator[0] not in ("uniform", "normal", "atoms"):
            raise ValueError(f"unknown generator {self.generator[0]!r}")

    def cells(self):
        """(epsilon, n) pairs in deterministic order, epsilon-major."""
        return [(eps, n) for eps in self.epsilon_grid for n in self.n_list]


def _cell_distribution(plan, eps):
    kind = plan.generator[0]
    if kind == "uniform":
        lo, hi = float(plan.generator[1]), float(plan.generator[2])
        if hi + eps <= lo:
            raise ValueError("degenerate uniform interval")
        return ("uniform", lo, hi + eps)
    if kind == "normal":
        mu, sd = float(plan.generator[1]), float(plan.generator[2])
        if sd <= 0.0:
            raise ValueError("normal scale must be positive")
        return ("normal", mu + eps, sd)
    return plan.generator  # user atoms: epsilon ignored


def generate(plan, cell, replicate):
    """Draw the sample for one (cell, replicate); counter-style substream."""
    cells = plan.cells()
    eps, n = cells[cell]
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((plan.seed, cell, replicate))))
    dist = _cell_distribution(plan, eps)
    if dist[0] == "uniform":
        x = rng.uniform(dist[1], dist[2], size=n)
    elif dist[0] == "normal":
        x = rng.normal(dist[1], dist[2], size=n)
    else:
        pts = np.asarray(dist[1], dtype=float)
        w = np.asarray(dist[2], dtype=float)
        x = rng.choice(pts, size=n, p=w / w.sum())
    return WeightedSample.from_points(x)


def _run_cell(plan, cell):
    eps, n = plan.cells()[cell]
    model = get_model(plan.model)
    fam = resolve_family(plan.family)
    rejections = 0
    failures = 0
    for rep in range(plan.runs):
        sample = generate(plan, cell, rep)
        try:
            report, _ = test_model(fam, model, sample, plan.alpha,
                                   options=MC_OPTIONS)
            rejected = report.decision == "reject"
        except PhidivError:
            # failed fits (e.g. unbounded duals at every start) count as
            # rejections, consistent with the boundary policy in inference
            rejected = True
            failures += 1
        if rejected:
            rejections += 1
    rate = rejections / plan.runs
    return {
        "epsilon": eps,
        "n": n,
        "rejection_rate": rate,
        "mc_stderr": math.sqrt(rate * (1.0 - rate) / plan.runs),
        "failures": failures,
        "unreliable": failures > 0.05 * plan.runs,
    }


def _cell_worker(args):
    plan, cell = args
    return _run_cell(plan, cell)


def mc_power(plan, threads=1):
    """Empirical rejection rate for every (epsilon, n) cell of the plan."""
    cells = range(len(plan.cells()))
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_cell_worker, [(plan, c) for c in cells]))
    else:
        rows = [_run_cell(plan, c) for c in cells]
    return rows


def discretize_uniform(lo, hi, atoms):
    """Midpoint discretization of a uniform law as a weighted sample."""
    edges = np.linspace(lo, hi, atoms + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return WeightedSample(mids, np.full(atoms, 1.0 / atoms))


def approx_power_curve(plan, atoms=10_000):
    """Analytic power approximation for every cell of the plan.

    Discretizes the alternative, computes the population divergence and the
    criterion standard deviation at the pseudo-true parameter, then applies
    the normal power formula.  At epsilon = 0 the divergence degenerates to
    zero and the cell reports the nominal level by convention.
    """
    model = get_model(plan.model)
    fam = resolve_family(plan.family)
    df = model.l - model.d
    rows = []
    for eps in plan.epsilon_grid:
        dist = _cell_distribution(plan, eps)
        if dist[0] != "uniform":
            raise ValueError("analytic power curve supports uniform alternatives")
        p0 = discretize_uniform(dist[1], dist[2], atoms)
        try:
            est = population_estimate(fam, model, p0, options=MC_OPTIONS)
            div = max(est.divergence_hat, 0.0)
            sigma = math.sqrt(max(est.sigma2_hat, 0.0))
        except PhidivError:
            for n in plan.n_list:
                rows.append({"epsilon": eps, "n": n, "approx_power": None})
            continue
        for n in plan.n_list:
            if div < 1e-8 or sigma < 1e-12:
                power = plan.alpha
            else:
                power = power_approx(n, plan.alpha, df, div, sigma)
            rows.append({"epsilon": eps, "n": n, "approx_power": power})
    return rows


def reproduce_figure1(seed, out_path=None, family="KLm",
                      n_list=DEFAULT_N_LIST, epsilon_grid=None,
                      runs=DEFAULT_RUNS, alpha=0.05, threads=1, atoms=10_000):
    """Monte Carlo power versus its analytic approximation on one CSV table.

    Columns: n, epsilon, mc_power, mc_stderr, approx_power; one row per
    (n, epsilon).  Reruns with the same seed are byte-identical regardless
    of the worker count.
    """
    if epsilon_grid is None:
        epsilon_grid = tuple(np.round(np.linspace(0.1, 1.0, 10), 10))
    plan = SimulationPlan(("uniform", -1.0, 1.0), "mean-variance", family,
                          tuple(n_list), runs, alpha, tuple(epsilon_grid), seed)
    mc_rows = mc_power(plan, threads=threads)
    ap_rows = approx_power_curve(plan, atoms=atoms)
    approx = {(r["epsilon"], r["n"]): r["approx_power"] for r in ap_rows}
    rows = []
    for r in mc_rows:
        key = (r["epsilon"], r["n"])
        rows.append({
            "n": r["n"],
            "epsilon": r["epsilon"],
            "mc_power": r["rejection_rate"],
            "mc_stderr": r["mc_stderr"],
            "approx_power": approx.get(key),
            "failures": r["failures"],
        })
    rows.sort(key=lambda r: (r["n"], r["epsilon"]))
    if out_path is not None:
        write_power_csv(rows, out_path)
    return rows


def write_power_csv(rows, path):
    """Deterministic CSV dump: UTF-8, LF endings, round-trip float format."""
    cols = ["n", "epsilon", "mc_power", "mc_stderr", "approx_power"]
    lines = [",".join(cols)]
    for r in rows:
        cells = []
        for c in cols:
            v = r[c]
            if v is None:
                cells.append("")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format(float(v), ".17g"))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
