"""Estimating-function models and weighted samples.

A model packages the moment function g(x, theta) in R^l, its Jacobian with
respect to theta, the problem dimensions and a compact box for the parameter.
Evaluation is vectorized over observations: points are always handled as an
(n, m) array, g returns (n, l) and the Jacobian (n, l, d).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DataError, ParameterSpaceError


@dataclass(frozen=True)
class MomentModel:
    name: str
    m: int
    d: int
    l: int
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g_jac: Callable[[np.ndarray, np.ndarray], np.ndarray]
    theta_lo: np.ndarray = field(default=None)
    theta_hi: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.l < self.d:
            raise ValueError("need at least as many moment functions as parameters")
        lo = np.full(self.d, -10.0) if self.theta_lo is None else np.broadcast_to(
            np.asarray(self.theta_lo, dtype=float), (self.d,)).copy()
        hi = np.full(self.d, 10.0) if self.theta_hi is None else np.broadcast_to(
            np.asarray(self.theta_hi, dtype=float), (self.d,)).copy()
        if np.any(lo >= hi):
            raise ValueError("parameter box must have lo < hi")
        object.__setattr__(self, "theta_lo", lo)
        object.__setattr__(self, "theta_hi", hi)

    def check_theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise ParameterSpaceError(f"theta must have dimension {self.d}")
        if np.any(theta < self.theta_lo) or np.any(theta > self.theta_hi):
            raise ParameterSpaceError(f"theta={theta} outside the parameter box")
        return theta

    def clip_theta(self, theta):
        return np.clip(np.asarray(theta, dtype=float), self.theta_lo, self.theta_hi)

    def g_values(self, points, theta):
        """Moment function at every point; (n, l)."""
        out = np.asarray(self.g(np.atleast_2d(points), np.atleast_1d(theta)), dtype=float)
        return out.reshape(-1, self.l)

    def jac_values(self, points, theta):
        """d g / d theta at every point; (n, l, d)."""
        out = np.asarray(self.g_jac(np.atleast_2d(points), np.atleast_1d(theta)), dtype=float)
        return out.reshape(-1, self.l, self.d)


@dataclass(frozen=True)
class WeightedSample:
    """Finite-support measure: n points in R^m with probability weights.

    Uniform 1/n weights represent the empirical measure of a data set; a
    non-uniform instance can hold a discretized reference distribution.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim <= 1:
            pts = pts.reshape(-1, 1)  # a flat vector is n scalar observations
        w = np.asarray(self.weights, dtype=float)
        if pts.shape[0] == 0:
            raise DataError("empty sample")
        if w.shape != (pts.shape[0],):
            raise DataError("weights must be one per observation")
        if np.any(w < 0.0):
            raise DataError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-8:
            raise DataError("weights must sum to one")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.points.shape[0]

    @classmethod
    def from_points(cls, points):
        pts = np.asarray(points, dtype=float)
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))


def gbar(model, x, theta):
    """Augmented moment vector (1, g(x, theta)).

    Accepts one point (scalar or length-m vector, returning shape (1+l,)) or
    a batch of points (returning (n, 1+l)).
    """
    theta = model.check_theta(theta)
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 or (arr.ndim == 1 and arr.shape[0] == model.m)
    pts = arr.reshape(1, model.m) if single else arr.reshape(-1, model.m)
    g = model.g_values(pts, theta)
    out = np.hstack([np.ones((g.shape[0], 1)), g])
    return out[0] if single else out


def moment_mean(model, sample, theta):
    """Weighted average of g over the sample; (l,)."""
    theta = model.check_theta(theta)
    g = model.g_values(sample.points, theta)
    return sample.weights @ g


def builtin_model(name, m=1, theta_lo=None, theta_hi=None):
    """Built-in models: 'mean' (x - theta, exactly identified) and
    'mean-variance' ((x, x^2 - theta), over-identified with l=2, d=1)."""
    if name == "mean":
        def g(x, theta):
            return x - theta[None, :]

        def g_jac(x, theta):
            n = x.shape[0]
            return np.broadcast_to(-np.eye(m), (n, m, m))

        return MomentModel("mean", m, m, m, g, g_jac, theta_lo, theta_hi)
    if name == "mean-variance":
        def g(x, theta):
            x0 = x[:, 0]
            return np.column_stack([x0, x0 * x0 - theta[0]])

        def g_jac(x, theta):
            n = x.shape[0]
            jac = np.zeros((n, 2, 1))
            jac[:, 1, 0] = -1.0
            return jac

        return MomentModel("mean-variance", 1, 1, 2, g, g_jac, theta_lo, theta_hi)
    raise ValueError(f"unknown builtin model: {name!r}")


_REGISTRY = {}


def register_model(name, model):
    """Register a user model for lookup by name (CLI / config files)."""
    _REGISTRY[name] = model


def get_model(name, **kwargs):
    if name in _REGISTRY:
        return _REGISTRY[name]
    return builtin_model(name, **kwargs)


def load_csv(path, header=False):
    """Read a sample from CSV: one row per observation, m numeric columns.

    Raises :class:`DataError` naming the offending row and column on any
    non-numeric cell or ragged row.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if header and i == 0:
                continue
            if not row or all(c.strip() == "" for c in row):
                continue
            vals = []
            for j, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {i + 1}, column {j + 1}")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}: row {i + 1} has {len(r)} columns, expected {width}")
    return WeightedSample.from_points(np.asarray(rows, dtype=float))
