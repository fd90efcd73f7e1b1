"""Closed-form divergence generator families and their convex conjugates.

A family is described by a convex generator ``phi`` with ``phi(1) = 0`` and
its Fenchel-Legendre conjugate ``psi(t) = sup_x {t*x - phi(x)}``.  The whole
power family is parameterized by a real index ``gamma``:

    gamma = 0    modified Kullback-Leibler (KLm, the empirical likelihood one)
    gamma = 1    Kullback-Leibler (KL)
    gamma = 2    chi-square (quadratic, defined on all of R)
    gamma = -1   modified chi-square
    gamma = 1/2  Hellinger, with the 2*(sqrt(x)-1)^2 normalization

The log cases gamma in {0, 1} and the quadratic case gamma = 2 use dedicated
closed forms; every other index goes through the generic power formulas, so
e.g. Hellinger and Power(0.5) are the same code path by construction.

Values outside a domain are reported as +inf (never NaN or overflow); at a
finite conjugate-domain endpoint ``psi`` returns its closure value, while the
derivative accessors raise :class:`DomainError` outside the open interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

INF = float("inf")


@dataclass(frozen=True)
class DivergenceFamily:
    """Immutable descriptor of one generator/conjugate pair."""

    name: str
    gamma: float
    a: float       # endpoints of dom phi
    b: float
    a_star: float  # endpoints of dom psi
    b_star: float

    # ----- generator -------------------------------------------------

    def phi(self, x):
        """Generator value, extended by +inf outside its domain."""
        return _as_like(x, _phi_arr(self.gamma, np.asarray(x, dtype=float)))

    def phi_derivs(self, x):
        """(phi'(x), phi''(x)) for x in the open interior of dom phi."""
        x = float(x)
        g = self.gamma
        if g != 2.0 and x <= 0.0:
            raise DomainError(f"{self.name}: x={x} not interior to dom phi")
        if g == 2.0:
            return x - 1.0, 1.0
        if g == 0.0:
            return 1.0 - 1.0 / x, 1.0 / (x * x)
        if g == 1.0:
            return math.log(x), 1.0 / x
        return (x ** (g - 1.0) - 1.0) / (g - 1.0), x ** (g - 2.0)

    # ----- conjugate -------------------------------------------------

    def psi(self, t):
        """Conjugate value; closure value at finite endpoints, +inf outside."""
        return _as_like(t, _psi_arr(self.gamma, np.asarray(t, dtype=float)))

    def psi_derivs(self, t):
        """(psi'(t), psi''(t)) for t in the open interior of dom psi."""
        t = float(t)
        if not (self.a_star < t < self.b_star):
            raise DomainError(f"{self.name}: t={t} not interior to dom psi")
        return float(self.psi_d1(t)), float(self.psi_d2(t))

    # Array-friendly derivative evaluators.  Callers (the dual solver) are
    # responsible for feasibility; out-of-domain entries come back inf/nan.
    def psi_d1(self, t):
        g = self.gamma
        t = np.asarray(t, dtype=float)
        if g == 2.0:
            return 1.0 + t
        if g == 1.0:
            with np.errstate(over="ignore"):
                return np.exp(t)
        base = (g - 1.0) * t + 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return base ** (1.0 / (g - 1.0))

    def psi_d2(self, t):
        g = self.gamma
        t = np.asarray(t, dtype=float)
        if g == 2.0:
            return np.ones_like(t)
        if g == 1.0:
            with np.errstate(over="ignore"):
                return np.exp(t)
        base = (g - 1.0) * t + 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return base ** ((2.0 - g) / (g - 1.0))

    def strictly_feasible(self, u, margin=1e-10):
        """True when every entry of u is inside dom psi, with an absolute
        safety margin at finite endpoints."""
        u = np.asarray(u, dtype=float)
        lo = self.a_star + margin if math.isfinite(self.a_star) else -INF
        hi = self.b_star - margin if math.isfinite(self.b_star) else INF
        return bool(np.all(u > lo) and np.all(u < hi))


def _as_like(x, arr):
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(np.asarray(arr).reshape(-1)[0])
    return np.asarray(arr)


def _phi_arr(g, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if g == 2.0:
        return 0.5 * (x - 1.0) ** 2
    out = np.full(x.shape, INF)
    pos = x > 0.0
    xp = x[pos]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if g == 0.0:
            out[pos] = -np.log(xp) + xp - 1.0
        elif g == 1.0:
            out[pos] = xp * np.log(xp) - xp + 1.0
            out[x == 0.0] = 1.0
        else:
            out[pos] = (xp ** g - g * xp + g - 1.0) / (g * (g - 1.0))
            if g > 0.0:
                out[x == 0.0] = 1.0 / g
    return out


def _psi_arr(g, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if g == 2.0:
        return 0.5 * t * t + t
    if g == 1.0:
        with np.errstate(over="ignore"):
            return np.expm1(t)
    out = np.full(t.shape, INF)
    if g == 0.0:
        ok = t < 1.0
        out[ok] = -np.log1p(-t[ok])
        return out
    base = (g - 1.0) * t + 1.0
    q = g / (g - 1.0)
    pos = base > 0.0
    with np.errstate(over="ignore"):
        out[pos] = (base[pos] ** q - 1.0) / g
    if q > 0.0:  # gamma > 1 or gamma < 0: closure value is finite at the edge
        out[base == 0.0] = -1.0 / g
    return out


def power_family(gamma):
    """Power-divergence family with index gamma (any real)."""
    gamma = float(gamma)
    named = {0.0: "KLm", 1.0: "KL", 2.0: "chi2", -1.0: "chi2m", 0.5: "hellinger"}
    name = named.get(gamma, f"power:{gamma:g}")
    if gamma == 2.0:
        a, b = -INF, INF
    else:
        a, b = 0.0, INF
    if gamma == 1.0 or gamma == 2.0:
        a_star, b_star = -INF, INF
    elif gamma > 1.0:
        a_star, b_star = -1.0 / (gamma - 1.0), INF
    else:
        a_star, b_star = -INF, 1.0 / (1.0 - gamma)
    return DivergenceFamily(name, gamma, a, b, a_star, b_star)


KLM = power_family(0.0)
KL = power_family(1.0)
CHI2 = power_family(2.0)
CHI2M = power_family(-1.0)
HELLINGER = power_family(0.5)

_BY_NAME = {
    "klm": KLM,
    "kl": KL,
    "chi2": CHI2,
    "chi2m": CHI2M,
    "hellinger": HELLINGER,
}


def family(spec):
    """Resolve a family from its name or a ``power:gamma`` spec string."""
    if isinstance(spec, DivergenceFamily):
        return spec
    key = str(spec).strip().lower()
    if key in _BY_NAME:
        return _BY_NAME[key]
    if key.startswith("power:"):
        try:
            return power_family(float(key.split(":", 1)[1]))
        except ValueError:
            pass
    raise ValueError(f"unknown divergence family: {spec!r}")


def numeric_conjugate(fam, t, lo, hi, num=1001, refine=10):
    """Grid maximization of x -> t*x - phi(x) over [lo, hi].

    Independent oracle for the closed-form conjugate: repeatedly zooms a
    uniform grid around the running argmax.  The caller must supply a bracket
    [lo, hi] containing the maximizer.
    """
    g = fam.gamma
    lo, hi = float(lo), float(hi)
    best_x = None
    for _ in range(refine):
        xs = np.linspace(lo, hi, num)
        vals = t * xs - _phi_arr(g, xs)
        k = int(np.nanargmax(vals))
        best_x = xs[k]
        half = (hi - lo) / num * 2.0
        lo, hi = best_x - half, best_x + half
    return float(t * best_x - fam.phi(best_x))
