"""Change of measure between biased-walk laws, on paths and at the exit time.

The Radon-Nikodym derivative between the walk of bias p2 and the walk of
bias p1 on the first n steps is r^n * z^s with

    r = sqrt(p2*q2 / (p1*q1)),   z = sqrt(p2*q1 / (p1*q2)),

evaluated at the terminal position s.  The same expression at (sigma,
S_sigma) changes measure on the stopped filtration, which is what the
reweighting and factorization identities below exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from . import walk
from .walk import MODE_FLOAT, MODE_RATIONAL, WalkSpec, exit_joint


def _check_bias(p, name="p") -> float:
    pf = float(Fraction(p) if isinstance(p, str) else p)
    if not 0.0 < pf < 1.0:
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {p!r}")
    return pf


@dataclass(frozen=True)
class WalkLikelihoodRatio:
    n: int
    s: int
    p_from: object
    p_to: object
    value: object  # float, or Fraction in rational mode


def likelihood_ratio_walk(n: int, s: int, p_from, p_to,
                          mode: str = MODE_FLOAT) -> WalkLikelihoodRatio:
    """dQ_{p_to}/dQ_{p_from} on the sigma-field of the first n steps, at S_n = s.

    Because s and n share parity, the square roots cancel: with u = (n+s)/2
    up-steps and d = (n-s)/2 down-steps the value is
    (p_to/p_from)^u * (q_to/q_from)^d, which is exact in rational mode.
    Float mode works in log space to dodge under/overflow at large n.
    """
    _check_bias(p_from, "p_from")
    _check_bias(p_to, "p_to")
    if abs(s) > n:
        raise ValueError(f"|s|={abs(s)} exceeds the step count n={n}")
    if (n - s) % 2 != 0:
        raise ValueError(f"position s={s} and step count n={n} must share parity")
    u = (n + s) // 2
    d = (n - s) // 2
    if mode == MODE_RATIONAL:
        pf = walk.exact_fraction(p_from)
        pt = walk.exact_fraction(p_to)
        value = (pt / pf) ** u * ((1 - pt) / (1 - pf)) ** d
    else:
        pf = float(Fraction(p_from) if isinstance(p_from, str) else p_from)
        pt = float(Fraction(p_to) if isinstance(p_to, str) else p_to)
        log_val = (u * (math.log(pt) - math.log(pf))
                   + d * (math.log1p(-pt) - math.log1p(-pf)))
        value = math.exp(log_val)
    return WalkLikelihoodRatio(n, s, p_from, p_to, value)


def martingale_one_step_check(p, mode: str = MODE_FLOAT):
    """Deviation in E_{1/2}[(p/q)^(X/2)] = 1/(2*sqrt(pq)) for one +-1 step X.

    In rational mode both sides are compared after clearing the common factor
    sqrt(pq), where the identity reduces to p + q = 1; the deviation is then
    an exact 0.
    """
    if mode == MODE_RATIONAL:
        pf = walk.exact_fraction(p)
        _check_bias(pf)
        return abs(pf + (1 - pf) - 1)
    pf = _check_bias(p)
    q = 1.0 - pf
    lhs = 0.5 * (math.sqrt(pf / q) + math.sqrt(q / pf))
    rhs = 1.0 / (2.0 * math.sqrt(pf * q))
    return abs(lhs - rhs)


class ReweightedSurvival(NamedTuple):
    estimate: float
    tail_bound: float


def _rz(p_from: float, p_to: float):
    q_from = 1.0 - p_from
    q_to = 1.0 - p_to
    r = math.sqrt(p_to * q_to / (p_from * q_from))
    z = math.sqrt(p_to * q_from / (p_from * q_to))
    return r, z


def _tail_bound(spec_from: WalkSpec, r: float, z: float, truncation: int,
                residual_at_truncation: float) -> float:
    """Rigorous bound on the reweighted mass beyond the truncation step."""
    k = spec_from.k
    zmax = max(z**k, z**-k)
    A, rho = walk.interior_decay_envelope(spec_from)
    # r * rho equals the Perron value at the target bias, hence < 1 always
    geo = A * r ** (truncation + 1) * rho**truncation / (1.0 - r * rho)
    bound = zmax * geo
    if r <= 1.0:
        bound = min(bound, r**truncation * zmax * residual_at_truncation)
    return bound


def reweighted_survival_walk(p_from, p_to, k: int, n: int, truncation: int,
                             tail_tol: float | None = None) -> ReweightedSurvival:
    """Estimate P_{p_to}(sigma > n) from the p_from exit table by reweighting.

    Sums r^m * z^(+-k) over the exit rows m = n+1..truncation and returns the
    truncation error bound alongside.  A ``tail_tol`` only triggers a warning
    path: the bound is still returned, never silently dropped.
    """
    import warnings

    pf = _check_bias(p_from, "p_from")
    pt = _check_bias(p_to, "p_to")
    if truncation <= n:
        raise ValueError(f"truncation {truncation} must exceed n={n}")
    spec = WalkSpec(pf, k)
    table = exit_joint(spec, truncation, MODE_FLOAT)
    r, z = _rz(pf, pt)
    log_r, log_z = math.log(r), math.log(z)
    est = 0.0
    for m in range(n + 1, truncation + 1):
        wu = math.exp(m * log_r + k * log_z)
        wd = math.exp(m * log_r - k * log_z)
        est += wu * table.up[m] + wd * table.down[m]
    bound = _tail_bound(spec, r, z, truncation, table.residual[truncation])
    if tail_tol is not None and bound > tail_tol:
        warnings.warn(
            f"reweighting tail bound {bound:.3e} exceeds tolerance {tail_tol:.3e}; "
            "increase the truncation", RuntimeWarning)
    return ReweightedSurvival(est, bound)


def factorization_check_discrete(p1, p2, k: int, n: int, truncation: int) -> float:
    """Discrepancy in the conditional-expectation factorization of the survival.

    Both sides of

        Q_{p2}(sigma > n) = E_{p1}[r^sigma | sigma > n] / E_{p1}[r^sigma]
                            * Q_{p1}(sigma > n)

    are computed independently: the left from a direct DP at p2, the right
    entirely from the p1 exit table.  Requires 1/2 <= p1 < p2 < 1 so that
    r < 1 (asserted).
    """
    p1f = _check_bias(p1, "p1")
    p2f = _check_bias(p2, "p2")
    if not (0.5 <= p1f < p2f < 1.0):
        raise ValueError(f"need 1/2 <= p1 < p2 < 1, got p1={p1}, p2={p2}")
    if truncation <= n:
        raise ValueError(f"truncation {truncation} must exceed n={n}")
    r, _ = _rz(p1f, p2f)
    assert r < 1.0, "r-contraction must hold for 1/2 <= p1 < p2"
    spec1 = WalkSpec(p1f, k)
    table = exit_joint(spec1, truncation, MODE_FLOAT)
    pmf = [table.exit_pmf(m) for m in range(truncation + 1)]
    e_r = sum(r**m * pmf[m] for m in range(truncation + 1))
    e_r_after = sum(r**m * pmf[m] for m in range(n + 1, truncation + 1))
    rhs = e_r_after / e_r
    direct = walk.survival_pmf(WalkSpec(p2f, k), n, MODE_FLOAT).values[n]
    return abs(direct - rhs)


def check_independence_discrete(p, k: int, truncation: int,
                                mode: str = MODE_FLOAT):
    """Max deviation |P(sigma=n, S_sigma=+k) - P(sigma=n) P(S_sigma=+k)|.

    The side marginal P(S_sigma = +k) is the exact gambler's-ruin split
    p^k/(p^k + q^k), so in rational mode a correct table factorizes with
    deviation exactly 0 at every step up to the truncation.
    """
    spec = WalkSpec(p, k)
    table = exit_joint(spec, truncation, mode)
    h = walk.upper_exit_prob(spec, mode)
    if mode == MODE_RATIONAL:
        worst = Fraction(0)
    else:
        worst = 0.0
    for m in range(truncation + 1):
        dev = abs(table.up[m] - table.exit_pmf(m) * h)
        if dev > worst:
            worst = dev
    return worst
