"""Stochastic-dominance certification and the small verification lemmas.

A survival curve S_a dominates S_b when S_a(t) >= S_b(t) for every t.  The
discrete side is certified exactly (rational arithmetic); Monte Carlo data is
certified only up to simultaneous one-sided Dvoretzky-Kiefer-Wolfowitz bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import walk
from .walk import MODE_FLOAT, MODE_RATIONAL, WalkSpec

DOMINATES = "dominates"
VIOLATES = "violates"
INCONCLUSIVE = "inconclusive-within-noise"
CONSISTENT = "consistent-with-dominance"


@dataclass
class PairVerdict:
    lo_label: str     # parameter expected to survive longer
    hi_label: str
    verdict: str
    worst_violation: float = 0.0
    worst_location: object = None


@dataclass
class DominanceReport:
    """Survival values over a parameter grid plus per-adjacent-pair verdicts."""

    axis_name: str
    grid: list
    index_name: str
    index: list
    values: list          # values[i][j]: survival of grid[i] at index[j]
    pairs: list = field(default_factory=list)

    @property
    def n_violations(self) -> int:
        return sum(1 for p in self.pairs if p.verdict == VIOLATES)

    def worst(self) -> PairVerdict | None:
        bad = [p for p in self.pairs if p.verdict == VIOLATES]
        if not bad:
            return None
        return max(bad, key=lambda p: p.worst_violation)

    def to_json_obj(self) -> dict:
        return {
            "axis": self.axis_name,
            "grid": [str(g) for g in self.grid],
            "index": self.index_name,
            "index_values": [str(v) for v in self.index],
            "survival": [[float(v) for v in row] for row in self.values],
            "pairs": [
                {
                    "dominant": p.lo_label,
                    "dominated": p.hi_label,
                    "verdict": p.verdict,
                    "worst_violation": float(p.worst_violation),
                    "worst_location": None if p.worst_location is None
                                      else str(p.worst_location),
                }
                for p in self.pairs
            ],
            "n_violations": self.n_violations,
        }

    def to_text(self) -> str:
        lines = [f"dominance scan over {self.axis_name} "
                 f"({len(self.grid)} points, index {self.index_name})"]
        for p in self.pairs:
            line = f"  {p.lo_label} >= {p.hi_label}: {p.verdict}"
            if p.verdict == VIOLATES:
                line += (f"  (worst {p.worst_violation:.3e}"
                         f" at {self.index_name}={p.worst_location})")
            lines.append(line)
        lines.append(f"violations: {self.n_violations}")
        return "\n".join(lines)


def tail_conditional_mean_check(values, weights, M):
    """E[X | X <= M] <= E[X] for any distribution with P(X <= M) > 0.

    ``values``/``weights`` describe a finite distribution (weights need not be
    normalised).  Returns (conditional mean, unconditional mean, holds).
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape or values.size == 0:
        raise ValueError("values and weights must be equal-length and non-empty")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")
    total = weights.sum()
    mean = float(np.dot(values, weights) / total)
    sel = values <= M
    wsel = weights[sel].sum()
    if wsel <= 0:
        raise ValueError(f"conditioning event X <= {M} has zero mass")
    cond = float(np.dot(values[sel], weights[sel]) / wsel)
    return cond, mean, cond <= mean + 1e-12 * max(1.0, abs(mean))


def dominance_scan_discrete(ps, k: int, horizon: int,
                            mode: str = MODE_RATIONAL) -> DominanceReport:
    """Pairwise survival comparison of adjacent biases on an ascending grid.

    All biases must lie in [1/2, 1).  In rational mode the comparisons are
    exact.  In float mode, any apparent violation is automatically recomputed
    in rational arithmetic before being reported (a true violation would
    falsify the dominance theorem, so a float-mode artifact must not survive).
    """
    ps = list(ps)
    floats = [float(Fraction(p) if isinstance(p, str) else p) for p in ps]
    if any(f2 <= f1 for f1, f2 in zip(floats, floats[1:])):
        raise ValueError("bias grid must be strictly ascending")
    if any(not 0.5 <= f < 1.0 for f in floats):
        raise ValueError("all biases must lie in [1/2, 1)")
    curves = [walk.survival_pmf(WalkSpec(p, k), horizon, mode).values for p in ps]
    report = DominanceReport("p", ps, "n", list(range(horizon + 1)),
                             [[float(v) for v in c] for c in curves])
    for i in range(len(ps) - 1):
        lo, hi = curves[i], curves[i + 1]
        worst = None
        for n in range(horizon + 1):
            if hi[n] > lo[n]:
                gap = hi[n] - lo[n]
                if worst is None or gap > worst[0]:
                    worst = (gap, n)
        if worst is not None and mode == MODE_FLOAT:
            # escalate to exact arithmetic before declaring a violation
            lo_x = walk.survival_pmf(WalkSpec(ps[i], k), horizon,
                                     MODE_RATIONAL).values
            hi_x = walk.survival_pmf(WalkSpec(ps[i + 1], k), horizon,
                                     MODE_RATIONAL).values
            worst = None
            for n in range(horizon + 1):
                if hi_x[n] > lo_x[n]:
                    gap = float(hi_x[n] - lo_x[n])
                    if worst is None or gap > worst[0]:
                        worst = (gap, n)
        if worst is None:
            report.pairs.append(PairVerdict(str(ps[i]), str(ps[i + 1]), DOMINATES))
        else:
            report.pairs.append(PairVerdict(str(ps[i]), str(ps[i + 1]), VIOLATES,
                                            float(worst[0]), worst[1]))
    return report


def _ecdf_survival(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Empirical P(X > t) on a grid."""
    sorted_s = np.sort(samples)
    return 1.0 - np.searchsorted(sorted_s, grid, side="right") / samples.size


def empirical_dominance_test(samples_a, samples_b, confidence: float = 0.99):
    """DKW-banded test that samples_a stochastically dominates samples_b.

    Simultaneous one-sided bands at the requested joint confidence (the risk
    is split evenly between the two samples).  Returns (verdict, band_widths)
    where verdict is one of CONSISTENT, VIOLATES, INCONCLUSIVE.
    """
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    alpha = 1.0 - confidence
    eps_a = math.sqrt(math.log(2.0 / alpha) / (2.0 * a.size))
    eps_b = math.sqrt(math.log(2.0 / alpha) / (2.0 * b.size))
    grid = np.unique(np.concatenate([a, b]))
    surv_a = _ecdf_survival(a, grid)
    surv_b = _ecdf_survival(b, grid)
    if np.any(surv_b - eps_b > surv_a + eps_a):
        return VIOLATES, (eps_a, eps_b)
    if np.all(surv_a >= surv_b):
        return CONSISTENT, (eps_a, eps_b)
    return INCONCLUSIVE, (eps_a, eps_b)
