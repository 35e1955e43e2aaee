"""Analytic exit-time formulas for Brownian motion on the interval (-b, b).

The driftless survival probability P0(tau > t) has two classical forms: the
eigenfunction series (fast for t of order b^2 and beyond) and the
image-charge/reflection series (fast as t -> 0).  The drifted survival is
obtained from the driftless exit density via the change-of-measure identity

    P_lambda(tau > t) = cosh(lambda*b) * int_t^inf e^(-lambda^2 s / 2) f(s) ds,

which combines the exponential reweighting on the stopped filtration with
the independence of exit time and exit side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .dominance import DOMINATES, VIOLATES, DominanceReport, PairVerdict

# fraction of b^2 below which the reflection form replaces the eigenseries
_SMALL_T = 0.05


@dataclass(frozen=True)
class DriftSpec:
    """Drifted Brownian exit problem: drift rate lam, barrier half-width b."""

    lam: float
    b: float

    def __post_init__(self):
        if not (self.b > 0.0 and math.isfinite(self.b)):
            raise ValueError(f"barrier b must be positive and finite, got {self.b!r}")
        if not math.isfinite(self.lam):
            raise ValueError(f"drift must be finite, got {self.lam!r}")


@dataclass(frozen=True)
class SeriesControl:
    """Truncation/quadrature knobs shared by the analytic evaluators."""

    max_terms: int = 2000
    tol: float = 1e-12
    quad_limit: int = 200

    def __post_init__(self):
        if self.max_terms < 1 or self.tol <= 0.0:
            raise ValueError("need max_terms >= 1 and tol > 0")


DEFAULT_CONTROL = SeriesControl()


def _survival_series(b: float, t: float, ctl: SeriesControl) -> float:
    acc = 0.0
    for m in range(ctl.max_terms):
        n = 2 * m + 1
        term = (4.0 / (math.pi * n)) * math.exp(-n * n * math.pi**2 * t / (8.0 * b * b))
        acc += term if m % 2 == 0 else -term
        if term < ctl.tol:
            return acc
    raise ArithmeticError(
        f"survival series did not converge within {ctl.max_terms} terms at t={t}")


def _survival_reflection(b: float, t: float, ctl: SeriesControl) -> float:
    rt = math.sqrt(t)
    acc = 0.0
    for k in range(-20, 21):
        term = (2.0 * ndtr((1 - 4 * k) * b / rt)
                - ndtr((-1 - 4 * k) * b / rt)
                - ndtr((3 - 4 * k) * b / rt))
        acc += term
    return float(acc)


def driftless_survival(b: float, t: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """P0(tau > t) for the exit of standard Brownian motion from (-b, b)."""
    if b <= 0.0:
        raise ValueError("barrier b must be positive")
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return 1.0
    if t < _SMALL_T * b * b:
        val = _survival_reflection(b, t, ctl)
    else:
        val = _survival_series(b, t, ctl)
    return min(1.0, max(0.0, val))


def _density_series(b: float, t: float, ctl: SeriesControl) -> float:
    acc = 0.0
    for m in range(ctl.max_terms):
        n = 2 * m + 1
        term = (math.pi * n / (2.0 * b * b)) * math.exp(
            -n * n * math.pi**2 * t / (8.0 * b * b))
        acc += term if m % 2 == 0 else -term
        if term < ctl.tol:
            return acc
    raise ArithmeticError(
        f"density series did not converge within {ctl.max_terms} terms at t={t}")


def _density_reflection(b: float, t: float) -> float:
    rt = math.sqrt(t)
    inv = 1.0 / (math.sqrt(2.0 * math.pi) * t ** 1.5)
    acc = 0.0
    for k in range(-20, 21):
        c1 = (1 - 4 * k) * b
        c2 = (-1 - 4 * k) * b
        c3 = (3 - 4 * k) * b
        acc += (c1 * math.exp(-c1 * c1 / (2.0 * t))
                - 0.5 * c2 * math.exp(-c2 * c2 / (2.0 * t))
                - 0.5 * c3 * math.exp(-c3 * c3 / (2.0 * t)))
    return max(0.0, acc * inv)


def driftless_exit_density(b: float, t: float,
                           ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Density of tau at t (> 0) for driftless exit from (-b, b)."""
    if b <= 0.0:
        raise ValueError("barrier b must be positive")
    if t <= 0.0:
        raise ValueError("density requires t > 0")
    if t < _SMALL_T * b * b:
        return _density_reflection(b, t)
    return max(0.0, _density_series(b, t, ctl))


def _weighted_tail_series(b: float, t: float, g: float, ctl: SeriesControl) -> float:
    """int_t^inf e^(-g s) f(s) ds via termwise integration of the eigenseries."""
    acc = 0.0
    for m in range(ctl.max_terms):
        n = 2 * m + 1
        a = n * n * math.pi**2 / (8.0 * b * b)
        term = (math.pi * n / (2.0 * b * b)) * math.exp(-(a + g) * t) / (a + g)
        acc += term if m % 2 == 0 else -term
        if term < ctl.tol:
            return acc
    raise ArithmeticError(
        f"weighted tail series did not converge within {ctl.max_terms} terms")


def drifted_survival(spec: DriftSpec, t: float,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """P(tau > t) for Brownian motion with drift lam exiting (-b, b).

    The exit-time law depends on the drift only through |lam|, so negative
    drifts are served by symmetry.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    lam = abs(spec.lam)
    b = spec.b
    g = 0.5 * lam * lam
    t_switch = _SMALL_T * b * b
    if t >= t_switch:
        val = _weighted_tail_series(b, t, g, ctl)
    else:
        head, _ = integrate.quad(
            lambda s: math.exp(-g * s) * _density_reflection(b, s),
            t, t_switch, limit=ctl.quad_limit,
            epsabs=ctl.tol, epsrel=1e-12)
        val = head + _weighted_tail_series(b, t_switch, g, ctl)
    val *= math.cosh(lam * b)
    return min(1.0, max(0.0, val))


def drifted_survival_quad(spec: DriftSpec, t: float,
                          ctl: SeriesControl = DEFAULT_CONTROL):
    """Quadrature route for P(tau > t): independent of the termwise series.

    Returns (value, cutoff_bound) where cutoff_bound dominates the mass of
    the integrand beyond the truncation time.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    lam = abs(spec.lam)
    b = spec.b
    g = 0.5 * lam * lam
    a0 = math.pi**2 / (8.0 * b * b)
    # choose T_cut so the remaining weighted mass is far below tol
    target = ctl.tol / 10.0
    T_cut = max(t + b * b, 4.0 * b * b)
    while math.cosh(lam * b) * math.exp(-(g + a0) * T_cut) * (4.0 / math.pi) > target:
        T_cut *= 1.5
    pieces = sorted({t, _SMALL_T * b * b, b * b, T_cut})
    pieces = [s for s in pieces if t <= s <= T_cut]
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        part, _ = integrate.quad(
            lambda s: math.exp(-g * s) * driftless_exit_density(b, s, ctl),
            lo, hi, limit=ctl.quad_limit, epsabs=ctl.tol, epsrel=1e-11)
        total += part
    cutoff_bound = math.cosh(lam * b) * math.exp(-(g + a0) * T_cut) * (4.0 / math.pi)
    return math.cosh(lam * b) * total, cutoff_bound


def sign_given_modulus(lam: float, x: float):
    """P(B_t^lam = +x | |B_t^lam| = x) and its complement.

    Returns (p_plus, p_minus) with p_plus = e^(lam x) / (e^(lam x) + e^(-lam x)).
    """
    if x < 0.0:
        raise ValueError("modulus x must be nonnegative")
    # logistic form is overflow-safe
    p_plus = 1.0 / (1.0 + math.exp(-2.0 * lam * x))
    return p_plus, 1.0 - p_plus


def drift_y(lam: float, y: float) -> float:
    """Drift of the squared-modulus diffusion: 1 + 2 lam sqrt(y) tanh(lam sqrt(y))."""
    if y < 0.0:
        raise ValueError("squared position y must be nonnegative")
    s = math.sqrt(y)
    return 1.0 + 2.0 * lam * s * math.tanh(lam * s)


def dominance_scan_continuous(lambdas, b: float, times,
                              ctl: SeriesControl = DEFAULT_CONTROL,
                              tie_tol: float = 1e-8) -> DominanceReport:
    """Check that survival is non-increasing across an ascending drift grid.

    Ties within ``tie_tol`` count as dominance (the curves coincide at t = 0
    and as t -> infinity).
    """
    lambdas = [float(l) for l in lambdas]
    if any(l2 <= l1 for l1, l2 in zip(lambdas, lambdas[1:])):
        raise ValueError("drift grid must be strictly ascending")
    if any(l < 0.0 for l in lambdas):
        raise ValueError("drift grid must be nonnegative")
    times = [float(t) for t in times]
    values = [[drifted_survival(DriftSpec(l, b), t, ctl) for t in times]
              for l in lambdas]
    report = DominanceReport("lambda", lambdas, "t", times, values)
    for i in range(len(lambdas) - 1):
        lo, hi = values[i], values[i + 1]
        worst = None
        for j, t in enumerate(times):
            gap = hi[j] - lo[j]
            if gap > tie_tol and (worst is None or gap > worst[0]):
                worst = (gap, t)
        if worst is None:
            report.pairs.append(
                PairVerdict(str(lambdas[i]), str(lambdas[i + 1]), DOMINATES))
        else:
            report.pairs.append(
                PairVerdict(str(lambdas[i]), str(lambdas[i + 1]), VIOLATES,
                            worst[0], worst[1]))
    return report
