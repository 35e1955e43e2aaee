"""Monte Carlo engine: drifted Brownian exits, path reweighting, coupled SDEs.

Reproducibility contract: every batch of paths owns a Philox counter-based
substream derived from (master_seed, substream index), and batch results are
combined in fixed batch order, so output is bit-identical no matter how many
worker threads run the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.stats import chi2

from .bm import DriftSpec, drift_y

_MASK64 = (1 << 64) - 1
_CHUNK = 128


@dataclass(frozen=True)
class RngStreamSpec:
    """Master seed plus substream id for a counter-based generator family."""

    master_seed: int
    substream: int = 0
    algorithm: str = "philox"

    def __post_init__(self):
        if self.algorithm != "philox":
            raise ValueError(f"unsupported rng algorithm {self.algorithm!r}")

    def generator(self) -> np.random.Generator:
        key = [self.master_seed & _MASK64, self.substream & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStreamSpec":
        return replace(self, substream=self.substream + index)


@dataclass
class ExitSamples:
    """Struct-of-arrays collection of simulated exits from (-b, b).

    ``sides`` holds +1 / -1 for exits at +-b and 0 for paths censored at the
    horizon; censored rows keep ``times`` equal to the horizon.
    """

    spec: DriftSpec
    dt: float
    horizon: float
    times: np.ndarray
    sides: np.ndarray
    terminal: np.ndarray

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.sides == 0))

    def empirical_survival(self, t: float) -> float:
        """P(tau > t) with censored paths counted as survivors (t < horizon)."""
        if t >= self.horizon:
            raise ValueError("empirical survival undefined at/after the horizon")
        return float(np.mean(self.times > t))

    def exit_times(self) -> np.ndarray:
        """Exit times of the non-censored paths."""
        return self.times[self.sides != 0]


def _simulate_batch(lam, b, dt, n_steps, n, gen, bridge):
    sqdt = math.sqrt(dt)
    times = np.full(n, n_steps * dt)
    sides = np.zeros(n, dtype=np.int8)
    terminal = np.zeros(n)
    x = np.zeros(n)
    active = np.arange(n)
    step = 0
    while active.size and step < n_steps:
        c = min(_CHUNK, n_steps - step)
        z = gen.standard_normal((active.size, c))
        if bridge:
            uu = gen.random((active.size, c))
            ud = gen.random((active.size, c))
        path = x[active, None] + np.cumsum(lam * dt + sqdt * z, axis=1)
        prev = np.concatenate([x[active, None], path[:, :-1]], axis=1)
        if bridge:
            pu = np.exp(np.minimum(-2.0 * (b - prev) * (b - path) / dt, 0.0))
            pd = np.exp(np.minimum(-2.0 * (prev + b) * (path + b) / dt, 0.0))
            cross_up = uu < pu
            cross_dn = ud < pd
        else:
            cross_up = path >= b
            cross_dn = path <= -b
        exited = cross_up | cross_dn
        has_exit = exited.any(axis=1)
        rows = np.nonzero(has_exit)[0]
        if rows.size:
            cols = exited[rows].argmax(axis=1)
            pv = path[rows, cols]
            side = np.where(pv >= b, 1, np.where(pv <= -b, -1, 0)).astype(np.int8)
            unresolved = side == 0
            if np.any(unresolved):
                su = cross_up[rows, cols]
                sd = cross_dn[rows, cols]
                if bridge:
                    # both-barrier bridge fire in one step: take the likelier one
                    prefer_up = pu[rows, cols] >= pd[rows, cols]
                else:
                    prefer_up = su
                pick = np.where(su & ~sd, 1,
                                np.where(sd & ~su, -1,
                                         np.where(prefer_up, 1, -1))).astype(np.int8)
                side = np.where(unresolved, pick, side)
            ids = active[rows]
            times[ids] = (step + cols + 1) * dt
            sides[ids] = side
            terminal[ids] = pv
        keep = ~has_exit
        x[active[keep]] = path[keep, -1]
        active = active[keep]
        step += c
    terminal[active] = x[active]
    return times, sides, terminal


def simulate_exit_bm(spec: DriftSpec, dt: float, horizon: float, n_paths: int,
                     rng: RngStreamSpec, bridge_correction: bool = True,
                     batch_size: int = 4096, threads: int = 1) -> ExitSamples:
    """Euler simulation of exits of B_t + lam*t from (-b, b).

    With ``bridge_correction`` on, within-step barrier crossings are detected
    with the Brownian-bridge probability exp(-2(b-x_i)(b-x_{i+1})/dt) per
    barrier, removing the O(sqrt(dt)) late-exit bias of endpoint monitoring.
    Paths alive at the horizon are censored (side 0).
    """
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("dt and horizon must be positive")
    if dt > horizon:
        raise ValueError("dt must not exceed the horizon")
    if n_paths < 1:
        raise ValueError("need at least one path")
    n_steps = int(round(horizon / dt))
    sizes = [batch_size] * (n_paths // batch_size)
    if n_paths % batch_size:
        sizes.append(n_paths % batch_size)

    def run(i_sz):
        i, sz = i_sz
        gen = rng.child(i).generator()
        return _simulate_batch(spec.lam, spec.b, dt, n_steps, sz, gen,
                               bridge_correction)

    jobs = list(enumerate(sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    times = np.concatenate([p[0] for p in parts])
    sides = np.concatenate([p[1] for p in parts])
    terminal = np.concatenate([p[2] for p in parts])
    return ExitSamples(spec, dt, n_steps * dt, times, sides, terminal)


def likelihood_ratio_bm(samples: ExitSamples, lam_from: float,
                        lam_to: float) -> np.ndarray:
    """Girsanov weights exp(-(l1-l2) B_tau + (l1^2-l2^2)/2 tau) per path.

    Uses the recorded exit side (+-b) as B_tau.  Censored paths carry no
    usable weight, so any censored sample in the collection is rejected.
    """
    if np.any(samples.sides == 0):
        raise ValueError(
            "collection contains censored paths; extend the horizon or bound "
            "the censored mass before reweighting")
    b_tau = samples.sides * samples.spec.b
    expo = (-(lam_from - lam_to) * b_tau
            + 0.5 * (lam_from**2 - lam_to**2) * samples.times)
    return np.exp(expo)


class ReweightedEstimate(NamedTuple):
    estimate: float
    stderr: float
    censored_bound: float


def reweighted_survival_bm(samples: ExitSamples, lam_to: float, t: float,
                           censored_tol: float | None = None) -> ReweightedEstimate:
    """Estimate P_{lam_to}(tau > t) from paths simulated under samples.spec.

    Censored paths are excluded from the average (their weight is unknown)
    and their fraction is reported as an explicit bias bound.  In the
    identity case lam_to == lam_from they count with weight one, which makes
    the estimate coincide exactly with the plain empirical survival.
    """
    if t >= samples.horizon:
        raise ValueError("t must lie strictly before the sample horizon")
    lam_from = samples.spec.lam
    frac = samples.censored_fraction
    if censored_tol is not None and frac > censored_tol:
        raise RuntimeError(
            f"censored fraction {frac:.3e} exceeds tolerance {censored_tol:.3e}")
    contrib = np.zeros(samples.n)
    nc = samples.sides != 0
    if np.any(nc):
        b_tau = samples.sides[nc] * samples.spec.b
        expo = (-(lam_from - lam_to) * b_tau
                + 0.5 * (lam_from**2 - lam_to**2) * samples.times[nc])
        contrib[nc] = np.exp(expo) * (samples.times[nc] > t)
    if lam_to == lam_from:
        contrib[~nc] = 1.0  # censored paths certainly satisfy tau > t
    est = float(contrib.mean())
    se = float(contrib.std(ddof=1) / math.sqrt(samples.n))
    return ReweightedEstimate(est, se, frac)


class ChiSquareResult(NamedTuple):
    statistic: float
    dof: int
    p_value: float
    table: np.ndarray  # bins x 2 observed counts (+b column, -b column)


def check_independence_continuous(samples: ExitSamples, time_bins: int = 10,
                                  min_expected: float = 20.0) -> ChiSquareResult:
    """Chi-square test of independence between exit time and exit side.

    Exit times of non-censored paths are binned at empirical quantiles
    (equal-probability bins, merged down if an expected count would fall
    under ``min_expected``) and cross-tabulated against the exit side.
    """
    nc = samples.sides != 0
    taus = samples.times[nc]
    sides = samples.sides[nc]
    n = taus.size
    if n < 4 * min_expected:
        raise ValueError(f"sample of {n} non-censored exits is too small")
    p_minor = min(np.mean(sides > 0), np.mean(sides < 0))
    bins = time_bins
    while bins > 1 and n * p_minor / bins < min_expected:
        bins -= 1
    if bins < 2:
        raise ValueError("cannot form two bins with the required expected counts")
    edges = np.quantile(taus, np.linspace(0.0, 1.0, bins + 1))
    edges = np.unique(edges)
    if edges.size - 1 < 2:
        raise ValueError("exit times too concentrated to bin")
    idx = np.clip(np.searchsorted(edges, taus, side="right") - 1, 0, edges.size - 2)
    nb = edges.size - 1
    obs = np.zeros((nb, 2))
    for j in range(nb):
        sel = idx == j
        obs[j, 0] = np.sum(sides[sel] > 0)
        obs[j, 1] = np.sum(sides[sel] < 0)
    row = obs.sum(axis=1, keepdims=True)
    col = obs.sum(axis=0, keepdims=True)
    expected = row * col / n
    stat = float(np.sum((obs - expected) ** 2 / expected))
    dof = nb - 1
    return ChiSquareResult(stat, dof, float(chi2.sf(stat, dof)), obs)


@dataclass
class CoupledStats:
    """Summary of a shared-noise run of the squared-modulus SDE family."""

    lambdas: list
    dt: float
    horizon: float
    n_paths: int
    level: float
    violation_fraction: float      # over all (step, path, adjacent pair)
    pair_violation_fractions: list
    hit_times: np.ndarray          # shape (n_lambdas, n_paths); nan = not hit
    final_values: np.ndarray       # shape (n_lambdas, n_paths)

    def hit_summary(self, i: int):
        """(mean, stderr, hit fraction) of the level-hitting time for lambda i."""
        h = self.hit_times[i]
        ok = ~np.isnan(h)
        m = float(h[ok].mean())
        se = float(h[ok].std(ddof=1) / math.sqrt(ok.sum()))
        return m, se, float(ok.mean())


def simulate_y_coupled(lambdas, y0: float, dt: float, horizon: float,
                       n_paths: int, rng: RngStreamSpec, level: float = 1.0,
                       tol_factor: float = 0.5) -> CoupledStats:
    """Full-truncation Euler for dY = 2 sqrt(Y) dW + (1 + 2 lam sqrt(Y) tanh(lam sqrt(Y))) dt.

    Every drift value consumes the identical Gaussian increments, so the
    continuum comparison theorem predicts pathwise ordering across the
    ascending drift grid; the scheme is allowed a slack of
    ``tol_factor * sqrt(dt)`` times the local diffusion scale, and slack
    exceedances are counted as ordering violations.  First hits of ``level``
    are recorded per drift.
    """
    lambdas = [float(l) for l in lambdas]
    if any(l2 < l1 for l1, l2 in zip(lambdas, lambdas[1:])):
        raise ValueError("drift grid must be ascending")
    if y0 < 0.0:
        raise ValueError("initial value must be nonnegative")
    if dt <= 0.0 or horizon <= 0.0 or n_paths < 1:
        raise ValueError("dt, horizon and n_paths must be positive")
    L = len(lambdas)
    n_steps = int(round(horizon / dt))
    sqdt = math.sqrt(dt)
    gen = rng.generator()
    Y = np.full((L, n_paths), float(y0))
    hit = np.full((L, n_paths), np.nan)
    sq = np.empty_like(Y)
    viol = np.zeros(max(L - 1, 1), dtype=np.int64)
    lam_arr = np.array(lambdas)[:, None]
    for step in range(1, n_steps + 1):
        z = gen.standard_normal(n_paths)
        np.sqrt(np.maximum(Y, 0.0), out=sq)
        drift = 1.0 + 2.0 * lam_arr * sq * np.tanh(lam_arr * sq)
        Y = np.maximum(Y + drift * dt + 2.0 * sq * (sqdt * z), 0.0)
        t = step * dt
        newly = (Y >= level) & np.isnan(hit)
        hit[newly] = t
        if L > 1:
            tol = tol_factor * sqdt * 2.0 * np.sqrt(np.maximum(Y[1:], dt))
            viol += np.count_nonzero(Y[:-1] > Y[1:] + tol, axis=1)
    comparisons = n_steps * n_paths
    return CoupledStats(
        lambdas, dt, n_steps * dt, n_paths, level,
        float(viol.sum()) / (comparisons * max(L - 1, 1)),
        [float(v) / comparisons for v in viol],
        hit, Y)
